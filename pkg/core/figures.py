import os
from typing import Optional

import numpy as np
import plotly.graph_objects as go

from core.error_handler import KindMismatch, get_logger
from core.reports import Report, plot_frame

logger = get_logger(__name__)


# ============================================================
#                    FIGURES PER PLOT KIND
# ============================================================

def tail_figure(report: Report) -> go.Figure:
    """Survival on a log scale with the fitted C 2^(-t/C) envelope."""
    df = plot_frame(report, "tail")
    fig = go.Figure()
    positive = df[df["survival"] > 0]
    fig.add_trace(go.Scatter(
        x=positive["t"],
        y=positive["survival"],
        mode='lines+markers',
        name='Empirical survival',
        line=dict(color='#1f77b4', width=2),
        marker=dict(size=8)
    ))
    c1 = report.payload.get("fitted_c1")
    if isinstance(c1, (int, float)):
        t = np.linspace(0, df["t"].max(), 100)
        fig.add_trace(go.Scatter(
            x=t,
            y=c1 * 2 ** (-t / c1),
            mode='lines',
            name=f'C 2^(-t/C), C = {c1}',
            line=dict(color='#ff7f0e', width=3, dash='dash')
        ))
    fig.update_layout(
        title="Overlap tail",
        xaxis_title="t",
        yaxis_title="P[D >= t]",
        yaxis_type="log",
        height=400,
        template='plotly_white'
    )
    return fig


def speed_figure(report: Report) -> go.Figure:
    df = plot_frame(report, "speed")
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=df["n"],
        y=df["lambda_hat"],
        error_y=dict(type='data', array=df["stderr"]),
        mode='lines+markers',
        name='d(e, x_n) / n',
        line=dict(color='#1f77b4', width=2)
    ))
    fig.update_layout(
        title="Drift of the walk",
        xaxis_title="n",
        yaxis_title="speed",
        height=400,
        template='plotly_white'
    )
    return fig


def growth_figure(report: Report) -> go.Figure:
    df = plot_frame(report, "growth")
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=df["n"],
        y=df["M_n"],
        mode='lines+markers',
        line_shape='hv',
        name='M(n)',
        line=dict(color='#2ca02c', width=2)
    ))
    fig.update_layout(
        title="Mixed-identity-free growth",
        xaxis_title="n",
        yaxis_title="M(n)",
        height=400,
        template='plotly_white'
    )
    return fig


def scaling_figure(report: Report) -> go.Figure:
    df = plot_frame(report, "scaling")
    fig = go.Figure()
    fig.add_trace(go.Scatter(
        x=df["word_length"],
        y=df["nonsolution_length"],
        mode='lines+markers',
        name='|g|',
        text=[f"attempts: {a}" for a in df["attempts"]],
        line=dict(color='#9467bd', width=2)
    ))
    fig.update_layout(
        title="Non-solution length against word length",
        xaxis_title="|w|",
        yaxis_title="|g|",
        xaxis_type="log",
        height=400,
        template='plotly_white'
    )
    return fig


FIGURE_BUILDERS = {
    "tail": tail_figure,
    "speed": speed_figure,
    "growth": growth_figure,
    "scaling": scaling_figure,
}


def emit_figure(report: Report, kind: str, path: Optional[str] = None, output_dir: str = ".") -> str:
    """
    Write the figure of a report as standalone HTML.

    Raises:
        KindMismatch: If the report is not of this kind
    """
    if kind not in FIGURE_BUILDERS:
        raise KindMismatch(f"Unknown plot kind {kind!r}")
    fig = FIGURE_BUILDERS[kind](report)
    path = path or os.path.join(output_dir, f"{report.command.replace(' ', '-')}-{kind}.html")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    fig.write_html(path, include_plotlyjs="cdn")
    logger.info(f"Wrote {kind} figure to {path}")
    return path
