"""
Configuration management for the Stackelberg simulator
Centralized loading and validation of runtime settings from the environment
"""
import os
import logging
from typing import Optional, Dict, Any
from pathlib import Path
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

# Library-wide defaults; the CLI may override them through Config
PROFILE_CAP = 10**6
OFUL_CAP = 4096
REGION_SEEDS = 32


class ConfigurationError(Exception):
    """Raised when configuration is invalid or missing"""
    pass


class Config:
    """Central configuration for simulator runs"""

    def __init__(self, env_file: Optional[str] = None):
        """
        Initialize configuration from environment variables

        Args:
            env_file: Path to .env file (optional, defaults to .env in project root)
        """
        self._load_environment(env_file)
        self._validate_configuration()

    def _load_environment(self, env_file: Optional[str] = None):
        """Load environment variables from .env file and system environment"""
        if env_file is None:
            project_root = Path(__file__).parent.parent.parent
            env_file = project_root / '.env'

        if os.path.exists(env_file):
            load_dotenv(env_file)
            logger.info(f"Loaded environment variables from {env_file}")
        else:
            logger.debug(f"No .env file found at {env_file}, using system environment only")

    def _validate_configuration(self):
        """Validate all configuration values"""
        errors = []

        numeric_settings = {
            'THREADS': (1, 256),
            'PROFILE_CAP': (1, 10**8),
            'OFUL_CAP': (1, 10**5),
            'REGION_SEEDS': (1, 10**4),
        }

        for setting, (min_val, max_val) in numeric_settings.items():
            value = self._get_env_var(setting)
            if value:
                try:
                    num_value = int(value)
                    if not (min_val <= num_value <= max_val):
                        errors.append(f"{setting} must be between {min_val} and {max_val}")
                except ValueError:
                    errors.append(f"{setting} must be a valid integer")

        log_level = self._get_env_var('LOG_LEVEL', 'INFO').upper()
        if log_level not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            errors.append(f"LOG_LEVEL must be a standard logging level, got {log_level}")

        if errors:
            raise ConfigurationError("Configuration validation failed:\n" + "\n".join(f"  - {error}" for error in errors))

        logger.debug("Configuration validation passed")

    def _get_env_var(self, key: str, default: Optional[str] = None) -> Optional[str]:
        """Get environment variable with optional default"""
        value = os.getenv(key, default)
        return value if value else None

    @property
    def log_level(self) -> str:
        """Root logging level"""
        return self._get_env_var('LOG_LEVEL', 'INFO').upper()

    @property
    def threads(self) -> int:
        """Worker count for parallel replications"""
        return int(self._get_env_var('THREADS', '1'))

    @property
    def profile_cap(self) -> int:
        """Largest number of joint type profiles summed exactly"""
        return int(self._get_env_var('PROFILE_CAP', str(PROFILE_CAP)))

    @property
    def oful_cap(self) -> int:
        """Largest gram-matrix dimension for the linear bandit learner"""
        return int(self._get_env_var('OFUL_CAP', str(OFUL_CAP)))

    @property
    def region_seeds(self) -> int:
        """Number of random BFS seeds used by region enumeration"""
        return int(self._get_env_var('REGION_SEEDS', str(REGION_SEEDS)))

    @property
    def results_dir(self) -> str:
        """Default directory for trace and bench outputs"""
        return self._get_env_var('RESULTS_DIR', 'data/results')

    @property
    def log_dir(self) -> Optional[str]:
        """Directory for rotating log files, None when LOG_DIR is set empty"""
        if 'LOG_DIR' in os.environ:
            return os.environ['LOG_DIR'] or None
        return 'logs'

    def to_dict(self) -> Dict[str, Any]:
        """Convert configuration to dictionary for logging/debugging"""
        return {
            'log_level': self.log_level,
            'threads': self.threads,
            'profile_cap': self.profile_cap,
            'oful_cap': self.oful_cap,
            'region_seeds': self.region_seeds,
            'results_dir': self.results_dir,
            'log_dir': self.log_dir,
        }


# Global configuration instance
config = None


def get_config(env_file: Optional[str] = None) -> Config:
    """
    Get the global configuration instance

    Args:
        env_file: Path to .env file (only used on first call)

    Returns:
        Global Config instance
    """
    global config
    if config is None:
        config = Config(env_file)
    return config


def reset_config():
    """Reset the global configuration (useful for testing)"""
    global config
    config = None
