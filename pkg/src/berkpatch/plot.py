"""Static SVG of a patching certificate: log residual per step against its envelope."""
from __future__ import annotations

import math

from .patching import PatchingCertificate
from .ultrametric import NormValue


def _log_norm(n: NormValue) -> float | None:
    # log_p of the value, i.e. minus the exponent
    return None if n.is_zero else -n.e.approx()


def envelope_log(cert: PatchingCertificate, s: int, p: int) -> float:
    """log_p of d * eps'^((s+2)/2)."""
    return (math.log(cert.d) + (s + 2) / 2 * math.log(cert.eps_prime)) / math.log(p)


def convergence_svg(cert: PatchingCertificate, p: int = 5, width: int = 640, height: int = 400) -> str:
    if not cert.steps:
        raise ValueError("the certificate has no steps")
    steps = cert.steps
    obs = [_log_norm(st.residual) for st in steps]
    env = [envelope_log(cert, st.step, p) if cert.eps_prime > 0 else None for st in steps]
    finite = [y for y in obs + env if y is not None]
    ymax = max(finite) if finite else 0.0
    ymin = min(finite) if finite else -1.0
    floor = ymin - 1.0
    ymax += 0.5
    left, right, top, bottom = 60, 20, 20, 40
    n = len(steps)

    def px(i):
        return left + (width - left - right) * (i / max(n - 1, 1))

    def py(y):
        y = floor if y is None else y
        return top + (height - top - bottom) * (ymax - y) / (ymax - floor)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{left}" y1="{height - bottom}" x2="{width - right}" y2="{height - bottom}" stroke="black"/>',
        f'<line x1="{left}" y1="{top}" x2="{left}" y2="{height - bottom}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">step</text>',
        f'<text x="14" y="{height / 2:.1f}" font-size="12" transform="rotate(-90 14 {height / 2:.1f})"'
        ' text-anchor="middle">log_p residual</text>',
    ]
    if any(y is not None for y in env):
        pts = " ".join(f"{px(i):.2f},{py(y):.2f}" for i, y in enumerate(env) if y is not None)
        out.append(f'<polyline points="{pts}" fill="none" stroke="gray" stroke-dasharray="4 3"/>')
    pts = " ".join(f"{px(i):.2f},{py(y):.2f}" for i, y in enumerate(obs))
    out.append(f'<polyline points="{pts}" fill="none" stroke="steelblue"/>')
    for i, (st, y) in enumerate(zip(steps, obs)):
        bad = not (st.cond1 and st.cond2 and st.cond3)
        color = "red" if bad else "steelblue"
        r = 5 if bad else 2.5
        out.append(f'<circle class="{"violation" if bad else "step"}" cx="{px(i):.2f}" cy="{py(y):.2f}" r="{r}" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_convergence_plot(cert: PatchingCertificate, path, p: int = 5) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(convergence_svg(cert, p))


__all__ = ["convergence_svg", "emit_convergence_plot", "envelope_log"]
