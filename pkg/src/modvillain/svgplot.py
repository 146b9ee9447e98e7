"""Minimal static SVG log-log plot: scatter, fitted line, decade ticks."""

import math
from xml.sax.saxutils import escape

W, H = 560, 420
LEFT, RIGHT, TOP, BOTTOM = 80, 20, 40, 60


def _decades(lo, hi):
    return list(range(math.floor(lo), math.ceil(hi) + 1))


def loglog_svg(xs, ys, fit=None, title="", xlabel="n", ylabel="|O(n)|"):
    """SVG text for points (xs, |ys|) on log-log axes.

    ``fit`` is an optional ``(slope, log_intercept)`` pair in natural logs,
    drawn as a line across the data range and annotated with its slope.
    """
    pts = [(math.log10(x), math.log10(abs(y))) for x, y in zip(xs, ys) if x > 0 and y != 0]
    if not pts:
        raise ValueError("nothing to plot on log axes")
    lx = [p[0] for p in pts]
    ly = [p[1] for p in pts]
    x0, x1 = math.floor(min(lx) * 4) / 4, math.ceil(max(lx) * 4) / 4
    y0, y1 = math.floor(min(ly)), math.ceil(max(ly))
    if x1 == x0:
        x1 = x0 + 1
    if y1 == y0:
        y1 = y0 + 1
    pw, ph = W - LEFT - RIGHT, H - TOP - BOTTOM

    def sx(v):
        return LEFT + (v - x0) / (x1 - x0) * pw

    def sy(v):
        return TOP + (y1 - v) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>']
    for e in _decades(x0, x1):
        for m in range(1, 10):
            v = e + math.log10(m)
            if x0 <= v <= x1:
                major = m == 1
                out.append(f'<line x1="{sx(v):.2f}" y1="{TOP + ph}" x2="{sx(v):.2f}" '
                           f'y2="{TOP + ph - (8 if major else 4)}" stroke="black"/>')
                if major or m in (2, 5):
                    out.append(f'<text x="{sx(v):.2f}" y="{TOP + ph + 18}" text-anchor="middle">'
                               f'{10 ** v:g}</text>')
    for e in _decades(y0, y1):
        if y0 <= e <= y1:
            out.append(f'<line x1="{LEFT}" y1="{sy(e):.2f}" x2="{LEFT + 8}" y2="{sy(e):.2f}" stroke="black"/>')
            out.append(f'<text x="{LEFT - 6}" y="{sy(e) + 4:.2f}" text-anchor="end">1e{e}</text>')
    for a, b in pts:
        out.append(f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3.5" fill="#1f77b4"/>')
    if fit is not None:
        slope, icpt = fit
        la, lb = min(lx), max(lx)
        fa = (slope * la * math.log(10) + icpt) / math.log(10)
        fb = (slope * lb * math.log(10) + icpt) / math.log(10)
        out.append(f'<line x1="{sx(la):.2f}" y1="{sy(fa):.2f}" x2="{sx(lb):.2f}" y2="{sy(fb):.2f}" '
                   f'stroke="#d62728" stroke-width="1.5"/>')
        out.append(f'<text x="{LEFT + pw - 8}" y="{TOP + 18}" text-anchor="end" fill="#d62728">'
                   f'slope = {slope:.3f}</text>')
    out.append(f'<text x="{LEFT + pw / 2}" y="{H - 15}" text-anchor="middle">{escape(xlabel)}</text>')
    out.append(f'<text x="18" y="{TOP + ph / 2}" text-anchor="middle" '
               f'transform="rotate(-90 18 {TOP + ph / 2})">{escape(ylabel)}</text>')
    if title:
        out.append(f'<text x="{W / 2}" y="22" text-anchor="middle" font-size="14">{escape(title)}</text>')
    out.append("</svg>\n")
    return "\n".join(out)
