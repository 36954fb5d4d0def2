"""Artifact files: versioned CSV tables, key=value report lines and SVG plots."""
import csv
import io
import logging
import math
import os
import shlex
import tempfile

from ..errors import InvalidArgument

logger = logging.getLogger(__name__)

CSV_MAGIC = '# flatcore-csv v1'

PLOT_WIDTH = 640
PLOT_HEIGHT = 420
MARGIN = 64
COLORS = ('#1f5fa8', '#c0392b', '#2e8b57', '#8e44ad', '#d35400')


def atomic_write_text(path, text):
    """Write through a temporary file in the target directory, then rename"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'w', newline='') as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        if math.isnan(value):
            return 'nan'
        return '%.17g' % value
    if hasattr(value, 'item'):
        return format_value(value.item())
    return str(value)


def write_csv(path, kind, header, rows):
    """CSV with a schema line; rows are mappings keyed by header or plain sequences"""
    buffer = io.StringIO()
    buffer.write(f'{CSV_MAGIC} {kind}\n')
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        values = [row.get(name) for name in header] if isinstance(row, dict) else list(row)
        if len(values) != len(header):
            raise InvalidArgument(f"Row has {len(values)} values for {len(header)} columns")
        writer.writerow([format_value(v) for v in values])
    atomic_write_text(path, buffer.getvalue())
    logger.debug(f"Wrote {path}")
    return path


def read_csv(path):
    """(kind, header, rows as dicts of strings) of a file written by write_csv"""
    with open(path, newline='') as handle:
        first = handle.readline().rstrip('\n')
        if not first.startswith(CSV_MAGIC + ' '):
            raise InvalidArgument(f"{path}:1: missing '{CSV_MAGIC}' schema line")
        kind = first[len(CSV_MAGIC) + 1:].strip()
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise InvalidArgument(f"{path}:2: missing header row")
        rows = []
        for lineno, values in enumerate(reader, start=3):
            if len(values) != len(header):
                raise InvalidArgument(f"{path}:{lineno}: expected {len(header)} values, got {len(values)}")
            rows.append(dict(zip(header, values)))
    return kind, header, rows


def report_line(mapping):
    return ' '.join(f'{key}={shlex.quote(format_value(value))}' for key, value in mapping.items())


def write_report(path, reports):
    """One key=value line per report"""
    atomic_write_text(path, ''.join(report_line(r) + '\n' for r in reports))
    return path


def read_report(path):
    entries = []
    with open(path) as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            entry = {}
            for token in shlex.split(line):
                key, sep, value = token.partition('=')
                if not sep:
                    raise InvalidArgument(f"{path}:{lineno}: expected key=value, got {token!r}")
                entry[key] = value
            entries.append(entry)
    return entries


def _axis(values, log):
    values = [math.log10(v) for v in values if v > 0] if log else list(values)
    if not values:
        raise InvalidArgument("Nothing to plot on a logarithmic axis")
    lo, hi = min(values), max(values)
    if hi == lo:
        lo, hi = lo - 0.5, hi + 0.5
    return lo, hi


def _ticks(lo, hi, log):
    if log:
        return [float(k) for k in range(math.floor(lo), math.ceil(hi) + 1) if lo - 1e-9 <= k <= hi + 1e-9]
    return [lo + (hi - lo) * i / 4 for i in range(5)]


def svg_line_plot(path, series, title='', x_label='', y_label='', log_x=False, log_y=False, fit=None):
    """Standalone SVG with one polyline per (label, xs, ys) series

    `fit` is an optional (slope, intercept) pair drawn as a dashed line
    y = exp(intercept) x^slope on log-log axes or y = intercept + slope x.
    """
    xs_all = [x for _, xs, _ in series for x in xs]
    ys_all = [y for _, _, ys in series for y in ys]
    x_lo, x_hi = _axis(xs_all, log_x)
    y_lo, y_hi = _axis(ys_all, log_y)
    inner_w = PLOT_WIDTH - 2 * MARGIN
    inner_h = PLOT_HEIGHT - 2 * MARGIN

    def px(x):
        x = math.log10(x) if log_x else x
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * inner_w

    def py(y):
        y = math.log10(y) if log_y else y
        return PLOT_HEIGHT - MARGIN - (y - y_lo) / (y_hi - y_lo) * inner_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" '
        f'viewBox="0 0 {PLOT_WIDTH} {PLOT_HEIGHT}">',
        f'<rect width="{PLOT_WIDTH}" height="{PLOT_HEIGHT}" fill="white"/>',
        f'<text x="{PLOT_WIDTH / 2:.2f}" y="{MARGIN / 2:.2f}" text-anchor="middle" font-size="15">{title}</text>',
        f'<line x1="{MARGIN}" y1="{PLOT_HEIGHT - MARGIN}" x2="{PLOT_WIDTH - MARGIN}" '
        f'y2="{PLOT_HEIGHT - MARGIN}" stroke="black"/>',
        f'<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{PLOT_HEIGHT - MARGIN}" stroke="black"/>',
    ]
    for t in _ticks(x_lo, x_hi, log_x):
        x = MARGIN + (t - x_lo) / (x_hi - x_lo) * inner_w
        label = f'1e{int(t)}' if log_x else f'{t:.3g}'
        parts.append(f'<line x1="{x:.2f}" y1="{PLOT_HEIGHT - MARGIN}" x2="{x:.2f}" '
                     f'y2="{PLOT_HEIGHT - MARGIN + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{PLOT_HEIGHT - MARGIN + 18}" text-anchor="middle" '
                     f'font-size="11">{label}</text>')
    for t in _ticks(y_lo, y_hi, log_y):
        y = PLOT_HEIGHT - MARGIN - (t - y_lo) / (y_hi - y_lo) * inner_h
        label = f'1e{int(t)}' if log_y else f'{t:.3g}'
        parts.append(f'<line x1="{MARGIN - 5}" y1="{y:.2f}" x2="{MARGIN}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{MARGIN - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{label}</text>')
    parts.append(f'<text x="{PLOT_WIDTH / 2:.2f}" y="{PLOT_HEIGHT - 16}" text-anchor="middle" '
                 f'font-size="13">{x_label}</text>')
    parts.append(f'<text x="16" y="{PLOT_HEIGHT / 2:.2f}" text-anchor="middle" font-size="13" '
                 f'transform="rotate(-90 16 {PLOT_HEIGHT / 2:.2f})">{y_label}</text>')

    for k, (label, xs, ys) in enumerate(series):
        color = COLORS[k % len(COLORS)]
        points = [(px(x), py(y)) for x, y in zip(xs, ys)
                  if (x > 0 or not log_x) and (y > 0 or not log_y)]
        if points:
            path_points = ' '.join(f'{x:.2f},{y:.2f}' for x, y in points)
            parts.append(f'<polyline points="{path_points}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        for x, y in points:
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
        parts.append(f'<text x="{PLOT_WIDTH - MARGIN + 4}" y="{MARGIN + 16 * k + 4}" font-size="11" '
                     f'fill="{color}">{label}</text>')

    if fit is not None and xs_all:
        slope, intercept = fit
        ends = [min(xs_all), max(xs_all)]
        if log_x and log_y:
            values = [math.exp(intercept) * x ** slope for x in ends]
        else:
            values = [intercept + slope * x for x in ends]
        if not log_y or all(v > 0 for v in values):
            (x1, x2), (y1, y2) = [px(x) for x in ends], [py(v) for v in values]
            parts.append(f'<line x1="{x1:.2f}" y1="{y1:.2f}" x2="{x2:.2f}" y2="{y2:.2f}" '
                         f'stroke="#555555" stroke-dasharray="6 4"/>')
    parts.append('</svg>')
    atomic_write_text(path, '\n'.join(parts) + '\n')
    return path
