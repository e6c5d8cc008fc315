"""
Markdown run reports for bench and oracle-check
"""
import logging
import os
from datetime import datetime
from typing import Any, Dict, Sequence

import pandas as pd
from jinja2 import Template

from src.harness.oracles import OracleReport

logger = logging.getLogger(__name__)

BENCH_TEMPLATE = Template("""\
# Benchmark: {{ summary.instance }}

Generated {{ summary.generated_at }}; T = {{ summary.T }}, {{ summary.replications }} replications, \
seed {{ summary.seed }}, {{ "%.0f"|format(100 * summary.confidence) }}% confidence intervals.

| Learner | Final mean cumulative regret | CI low | CI high | Window ratio (last/first) |
|---|---|---|---|---|
{% for row in summary.learners -%}
| {{ row.learner }} | {{ "%.4f"|format(row.final_mean) }} | {{ "%.4f"|format(row.ci_low) }} \
| {{ "%.4f"|format(row.ci_high) }} | {{ "%.3f"|format(row.window_ratio) }} |
{% endfor %}
{% if summary.output %}
Per-round table: `{{ summary.output }}`
{% endif %}
""")

ORACLE_TEMPLATE = Template("""\
# Oracle check

Generated {{ generated_at }}: {{ passed }} of {{ reports|length }} instances passed.

{% for report in reports -%}
## {{ report.instance }}: {{ "PASS" if report.passed else "FAIL" }}

{% for check in report.checks -%}
- {{ "✅" if check.passed else "❌" }} **{{ check.name }}**: {{ check.detail }}
{% endfor %}
{% endfor %}
""")


def bench_summary(frame: pd.DataFrame, windows: Dict[str, float], **details: Any) -> Dict[str, Any]:
    """Collect the final-round row of every learner from a bench table"""
    learners = []
    for learner, group in frame.groupby('learner', sort=False):
        last = group.iloc[-1]
        learners.append({
            'learner': learner,
            'final_mean': float(last['mean_cumulative_regret']),
            'ci_low': float(last['ci_low']),
            'ci_high': float(last['ci_high']),
            'window_ratio': windows.get(learner, float('nan')),
        })
    return {'learners': learners, 'generated_at': datetime.now().strftime('%Y-%m-%d %H:%M'), **details}


def render_bench_report(summary: Dict[str, Any]) -> str:
    return BENCH_TEMPLATE.render(summary=summary)


def render_oracle_report(reports: Sequence[OracleReport]) -> str:
    return ORACLE_TEMPLATE.render(
        reports=reports,
        passed=sum(1 for r in reports if r.passed),
        generated_at=datetime.now().strftime('%Y-%m-%d %H:%M'),
    )


def write_report(text: str, path: str) -> str:
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as handle:
        handle.write(text)
    logger.info(f"Report written to {path}")
    return path
