"""Self-contained HTML heatmaps of per-token information.

One row of shaded tokens per scoring scenario; darker blue means higher
surprisal.  The saturation anchor defaults to the 99th-percentile
surprisal across all scenarios so a single outlier token cannot wash out
the rest of the figure.  Output is a single HTML file with no external
resources, deterministic for a fixed spec, and escapes every piece of
input text.
"""

from __future__ import annotations

import html
import math
from dataclasses import dataclass, field

from .metrics import InfoProfile

# Full-saturation color; intensity interpolates linearly from white.
_HUE = (26, 60, 160)


@dataclass(frozen=True)
class HeatmapSpec:
    doc_id: str
    scenarios: tuple[tuple[str, InfoProfile], ...]
    anchor: float | None = None  # nats at full saturation; None = percentile
    metrics: dict[str, float | None] = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if not self.scenarios:
            raise ValueError("heatmap needs at least one scenario")
        labels = [label for label, _ in self.scenarios]
        if len(set(labels)) != len(labels):
            raise ValueError(f"scenario labels must be unique, got {labels}")
        for label, profile in self.scenarios:
            if profile.total_tokens == 0:
                raise ValueError(f"scenario {label!r} has no tokens")
        if self.anchor is not None and not self.anchor > 0:
            raise ValueError(f"anchor must be positive, got {self.anchor}")


def percentile_anchor(surprisals: list[float], q: float = 0.99) -> float:
    """Nearest-rank percentile; falls back to 1.0 when everything is 0."""
    if not surprisals:
        raise ValueError("no surprisals to anchor on")
    ordered = sorted(surprisals)
    rank = max(1, math.ceil(q * len(ordered)))
    anchor = ordered[rank - 1]
    return anchor if anchor > 0 else 1.0


def _token_style(surprisal: float, anchor: float) -> str:
    t = min(surprisal / anchor, 1.0)
    channels = (round(255 + (c - 255) * t) for c in _HUE)
    background = "#" + "".join(f"{c:02x}" for c in channels)
    # Flip to light text once the background gets dark enough to swallow it.
    text = ";color:#ffffff" if t >= 0.6 else ""
    return f"background:{background}{text}"


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _scenario_tokens(profile: InfoProfile):
    for scores in profile.per_sentence:
        yield scores.tokens, scores.surprisals


_STYLE = """
body { font-family: Georgia, serif; margin: 2em auto; max-width: 60em;
       color: #1a1a1a; background: #ffffff; }
h1 { font-size: 1.3em; } h2 { font-size: 1.05em; margin-bottom: 0.3em; }
.meta { color: #555555; font-size: 0.9em; }
table.legend { border-collapse: collapse; margin: 1em 0; }
table.legend th, table.legend td { border: 1px solid #cccccc;
       padding: 0.25em 0.7em; text-align: right; font-size: 0.9em; }
table.legend th:first-child, table.legend td:first-child { text-align: left; }
.tokens { line-height: 1.9; margin-bottom: 1.4em; }
.tokens span { padding: 0.1em 0.15em; border-radius: 2px; }
""".strip()


def render_heatmap(spec: HeatmapSpec) -> str:
    """Render the spec to a standalone UTF-8 HTML page."""
    all_surprisals = [
        s
        for _, profile in spec.scenarios
        for _, surprisals in _scenario_tokens(profile)
        for s in surprisals
    ]
    anchor = spec.anchor if spec.anchor is not None else percentile_anchor(all_surprisals)
    model_id = spec.scenarios[0][1].per_sentence[0].model_id

    out = []
    out.append("<!DOCTYPE html>")
    out.append('<html lang="en"><head><meta charset="utf-8">')
    out.append(f"<title>token information: {html.escape(spec.doc_id)}</title>")
    out.append(f"<style>{_STYLE}</style></head><body>")
    out.append(f"<h1>Token information heatmap: {html.escape(spec.doc_id)}</h1>")
    out.append(
        '<p class="meta">model: '
        f"{html.escape(model_id)} &middot; full saturation at "
        f"{anchor:.4f} nats &middot; token granularity follows the backend "
        "tokenizer</p>"
    )

    out.append('<table class="legend">')
    out.append(
        "<tr><th>scenario</th><th>total (nats)</th><th>tokens</th>"
        "<th>greedy hits</th></tr>"
    )
    for label, profile in spec.scenarios:
        hits = "-" if profile.greedy_hits is None else str(profile.greedy_hits)
        out.append(
            f"<tr><td>{html.escape(label)}</td>"
            f"<td>{profile.total_info:.4f}</td>"
            f"<td>{profile.total_tokens}</td>"
            f"<td>{hits}</td></tr>"
        )
    out.append("</table>")

    if spec.metrics:
        parts = [
            f"{html.escape(name)} = {html.escape(_fmt(spec.metrics[name]))}"
            for name in sorted(spec.metrics)
        ]
        out.append(f'<p class="meta">{" &middot; ".join(parts)}</p>')

    for label, profile in spec.scenarios:
        out.append(f"<h2>{html.escape(label)}</h2>")
        out.append('<div class="tokens">')
        sentence_html = []
        for tokens, surprisals in _scenario_tokens(profile):
            spans = []
            for token, s in zip(tokens, surprisals):
                spans.append(
                    f'<span style="{_token_style(s, anchor)}" '
                    f'title="{s:.4f} nats">{html.escape(token)}</span>'
                )
            sentence_html.append(" ".join(spans))
        out.append(" ".join(sentence_html))
        out.append("</div>")

    out.append("</body></html>")
    return "\n".join(out) + "\n"
