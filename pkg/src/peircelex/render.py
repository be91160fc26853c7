"""Diagram rendering: Graphviz DOT and a self-contained layered SVG.

Both renderers work from the interchange normal form, one column per layer,
and are deterministic: node ids and element order follow the layer walk, so
identical diagrams produce byte-identical output.

* DOT — boxes are rectangles, spiders and cups/caps are points, cuts are
  rounded clusters enclosing their bodies (wires crossing the boundary are
  ordinary edges into the cluster), and a box with holes is a bold cluster
  framing one sub-cluster per filling.
* SVG — wires are horizontal tracks, generators sit in their layer's column,
  cuts draw a rounded inset rectangle around the recursively rendered body,
  and hole fillings are framed inside their box.
"""

from __future__ import annotations

from . import diagram as dg

__all__ = ["to_dot", "to_svg"]


# ---------------------------------------------------------------------------
# DOT
# ---------------------------------------------------------------------------


class _Dot:
    def __init__(self) -> None:
        self.lines: list[str] = []
        self.nodes = 0
        self.clusters = 0

    def emit(self, depth: int, text: str) -> None:
        self.lines.append("  " * depth + text)

    def node(self, depth: int, attrs: str) -> str:
        name = f"n{self.nodes}"
        self.nodes += 1
        self.emit(depth, f"{name} [{attrs}];")
        return name

    def edge(self, depth: int, src: str, dst: str, obj: str) -> None:
        self.emit(depth, f'{src} -> {dst} [label="{obj}"];')

    def cluster(self) -> str:
        name = f"cluster_{self.clusters}"
        self.clusters += 1
        return name

    def walk(self, lf: dg.LayeredForm, producers: list[str], depth: int) -> list[str]:
        for layer in lf.layers:
            g = layer.gen
            s = len(layer.left)
            e = s + len(g.dom)
            ins = producers[s:e]
            match g:
                case dg.BoxInstance():
                    if g.fillings:
                        frame = self.cluster()
                        self.emit(depth, f"subgraph {frame} {{")
                        self.emit(depth + 1, f'label="{g.decl.name}"; style=bold;')
                        gid = self.node(depth + 1, f'label="{g.decl.name}" shape=box')
                        for i, filling in enumerate(g.fillings):
                            hole = self.cluster()
                            self.emit(depth + 1, f"subgraph {hole} {{")
                            self.emit(depth + 2, f'label="hole {i + 1}"; style=dashed;')
                            nested = dg.normalize(filling)
                            fin = [
                                self.node(depth + 2, f'label="{obj}" shape=plaintext')
                                for obj in nested.dom
                            ]
                            fout = self.walk(nested, fin, depth + 2)
                            for obj, pid in zip(nested.cod, fout):
                                out = self.node(depth + 2, f'label="{obj}" shape=plaintext')
                                self.edge(depth + 2, pid, out, obj)
                            self.emit(depth + 1, "}")
                        self.emit(depth, "}")
                    else:
                        gid = self.node(depth, f'label="{g.decl.name}" shape=box')
                case dg.Spider():
                    gid = self.node(depth, 'label="" shape=point width=0.12')
                case dg.Cup() | dg.Cap():
                    gid = self.node(depth, 'label="" shape=point width=0.08')
                case dg.Swap():
                    gid = self.node(depth, 'label="swap" shape=plaintext')
                case dg.Cut(body):
                    frame = self.cluster()
                    self.emit(depth, f"subgraph {frame} {{")
                    self.emit(depth + 1, 'label="cut"; style=rounded;')
                    outs = self.walk(dg.normalize(body), list(ins), depth + 1)
                    self.emit(depth, "}")
                    producers[s:e] = outs
                    continue
                case _:  # pragma: no cover
                    raise TypeError(f"unexpected generator {g!r}")
            for obj, pid in zip(g.dom, ins):
                self.edge(depth, pid, gid, obj)
            producers[s:e] = [gid] * len(g.cod)
        return producers


def to_dot(d: dg.Diagram) -> str:
    """Graphviz source for the diagram, deterministic node ids."""
    b = _Dot()
    b.emit(0, "digraph diagram {")
    b.emit(1, "rankdir=LR;")
    b.emit(1, 'node [fontname="Helvetica"]; edge [fontname="Helvetica"];')
    lf = dg.normalize(d)
    producers = [b.node(1, f'label="{obj}" shape=plaintext') for obj in lf.dom]
    out = b.walk(lf, producers, 1)
    for obj, pid in zip(lf.cod, out):
        sink = b.node(1, f'label="{obj}" shape=plaintext')
        b.edge(1, pid, sink, obj)
    b.emit(0, "}")
    return "\n".join(b.lines) + "\n"


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_ROW = 28  # vertical wire pitch
_COL = 72  # horizontal layer pitch
_PAD = 12


def _fmt(v: float) -> str:
    return f"{v:g}"


class _Svg:
    def __init__(self) -> None:
        self.parts: list[str] = []
        self.max_x = 0.0
        self.max_y = 0.0

    def add(self, text: str, x: float, y: float) -> None:
        self.parts.append(text)
        self.max_x = max(self.max_x, x)
        self.max_y = max(self.max_y, y)

    def line(self, x1: float, y1: float, x2: float, y2: float) -> None:
        self.add(
            f'<line x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
            'stroke="black"/>',
            max(x1, x2),
            max(y1, y2),
        )

    def curve(self, x: float, y1: float, y2: float, bend: float) -> None:
        c = x + bend
        self.add(
            f'<path d="M {_fmt(x)} {_fmt(y1)} C {_fmt(c)} {_fmt(y1)} {_fmt(c)} '
            f'{_fmt(y2)} {_fmt(x)} {_fmt(y2)}" stroke="black" fill="none"/>',
            max(x, c),
            max(y1, y2),
        )


def _layer_width(g: dg.Diagram) -> float:
    if isinstance(g, dg.Cut):
        return _body_size(g.body)[0] + 4 * _PAD
    if isinstance(g, dg.BoxInstance) and g.fillings:
        w = max(_body_size(f)[0] for f in g.fillings)
        return max(_COL, w + 4 * _PAD)
    return _COL


def _body_size(d: dg.Diagram) -> tuple[float, float]:
    lf = dg.normalize(d)
    width = 2 * _PAD + sum(_layer_width(l.gen) for l in lf.layers)
    rows = max([len(lf.dom)] + [len(l.cod) for l in lf.layers] + [1])
    height = rows * _ROW
    for layer in lf.layers:
        g = layer.gen
        if isinstance(g, dg.Cut):
            height = max(height, len(layer.left) * _ROW + _body_size(g.body)[1] + 2 * _PAD)
        elif isinstance(g, dg.BoxInstance) and g.fillings:
            nested = sum(_body_size(f)[1] + _PAD for f in g.fillings) + _ROW
            height = max(height, len(layer.left) * _ROW + nested)
    return width, height


def _wire_y(base: float, index: int) -> float:
    return base + index * _ROW + _ROW / 2


def _emit(svg: _Svg, lf: dg.LayeredForm, x: float, y: float) -> None:
    cursor = x + _PAD
    count = len(lf.dom)
    for layer in lf.layers:
        g = layer.gen
        width = _layer_width(g)
        s = len(layer.left)
        m, c = len(g.dom), len(g.cod)
        # Wires passing left and right of the generator.
        for i in range(s):
            svg.line(cursor, _wire_y(y, i), cursor + width, _wire_y(y, i))
        for i in range(s + m, count):
            svg.line(cursor, _wire_y(y, i), cursor + width, _wire_y(y, i - m + c))
        mid = cursor + width / 2
        in_ys = [_wire_y(y, s + i) for i in range(m)]
        out_ys = [_wire_y(y, s + i) for i in range(c)]
        match g:
            case dg.Cut(body):
                bw, bh = _body_size(body)
                top = _wire_y(y, s) - _ROW / 2 if m or c else y + s * _ROW
                svg.add(
                    f'<rect x="{_fmt(cursor + _PAD)}" y="{_fmt(top)}" width="{_fmt(bw + 2 * _PAD)}" '
                    f'height="{_fmt(bh + _PAD)}" rx="10" fill="none" stroke="black"/>',
                    cursor + _PAD + bw + 2 * _PAD,
                    top + bh + _PAD,
                )
                for i in range(m):
                    svg.line(cursor, in_ys[i], cursor + 2 * _PAD, in_ys[i])
                    svg.line(cursor + width - 2 * _PAD, in_ys[i], cursor + width, in_ys[i])
                _emit(svg, dg.normalize(body), cursor + 2 * _PAD, top + _PAD / 2)
            case dg.BoxInstance():
                span = max(m, c, 1)
                top = _wire_y(y, s) - _ROW / 2
                if g.fillings:
                    bh = sum(_body_size(f)[1] + _PAD for f in g.fillings) + _ROW
                    bw = width - 2 * _PAD
                    svg.add(
                        f'<rect x="{_fmt(cursor + _PAD)}" y="{_fmt(top + 4)}" width="{_fmt(bw)}" '
                        f'height="{_fmt(bh)}" fill="white" stroke="black" stroke-width="1.5"/>',
                        cursor + _PAD + bw,
                        top + 4 + bh,
                    )
                    svg.add(
                        f'<text x="{_fmt(mid)}" y="{_fmt(top + 20)}" text-anchor="middle" '
                        f'font-family="sans-serif" font-size="13">{g.decl.name}</text>',
                        mid,
                        top + 20,
                    )
                    fy = top + _ROW
                    for filling in g.fillings:
                        fw, fh = _body_size(filling)
                        svg.add(
                            f'<rect x="{_fmt(mid - fw / 2)}" y="{_fmt(fy)}" width="{_fmt(fw)}" '
                            f'height="{_fmt(fh)}" fill="none" stroke="black" stroke-dasharray="4 3"/>',
                            mid + fw / 2,
                            fy + fh,
                        )
                        _emit(svg, dg.normalize(filling), mid - fw / 2, fy)
                        fy += fh + _PAD
                else:
                    bh = span * _ROW - 8
                    svg.add(
                        f'<rect x="{_fmt(mid - 26)}" y="{_fmt(top + 4)}" width="52" '
                        f'height="{_fmt(bh)}" fill="white" stroke="black" stroke-width="1.5"/>',
                        mid + 26,
                        top + 4 + bh,
                    )
                    svg.add(
                        f'<text x="{_fmt(mid)}" y="{_fmt(top + 4 + bh / 2 + 4)}" text-anchor="middle" '
                        f'font-family="sans-serif" font-size="13">{g.decl.name}</text>',
                        mid,
                        top + 4 + bh / 2,
                    )
                for yy in in_ys:
                    svg.line(cursor, yy, mid - 26 if not g.fillings else cursor + _PAD, yy)
                for yy in out_ys:
                    svg.line(mid + 26 if not g.fillings else cursor + width - _PAD, yy, cursor + width, yy)
            case dg.Spider():
                cy = (
                    (min(in_ys + out_ys) + max(in_ys + out_ys)) / 2
                    if in_ys or out_ys
                    else _wire_y(y, s)
                )
                for yy in in_ys:
                    svg.line(cursor, yy, mid, cy)
                for yy in out_ys:
                    svg.line(mid, cy, cursor + width, yy)
                svg.add(
                    f'<circle cx="{_fmt(mid)}" cy="{_fmt(cy)}" r="4" fill="black"/>',
                    mid + 4,
                    cy + 4,
                )
            case dg.Cup():
                svg.curve(cursor, in_ys[0], in_ys[1], width * 0.6)
            case dg.Cap():
                svg.curve(cursor + width, out_ys[0], out_ys[1], -width * 0.6)
            case dg.Swap():
                svg.line(cursor, in_ys[0], cursor + width, out_ys[1])
                svg.line(cursor, in_ys[1], cursor + width, out_ys[0])
            case _:  # pragma: no cover
                raise TypeError(f"unexpected generator {g!r}")
        cursor += width
        count = count - m + c
    for i in range(count):
        svg.line(cursor, _wire_y(y, i), cursor + _PAD, _wire_y(y, i))


def to_svg(d: dg.Diagram) -> str:
    """Self-contained SVG: one column per normalized layer, cuts inset."""
    svg = _Svg()
    _emit(svg, dg.normalize(d), 0, _PAD)
    w, h = svg.max_x + _PAD, svg.max_y + _PAD
    head = (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(w)}" height="{_fmt(h)}" '
        f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">'
    )
    return "\n".join([head, *svg.parts, "</svg>"]) + "\n"
