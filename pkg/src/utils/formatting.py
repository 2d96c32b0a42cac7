"""
Formatting - 数值与表格格式化

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import math
from typing import List, Optional, Sequence


def sig4(value: Optional[float]) -> str:
    """
    4 位有效数字

    None 显示为 "-"，无穷显示为 "inf"。

    Example:
        >>> sig4(0.372766667)
        '0.3728'
    """
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.4g}"


def render_table(headers: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    """左对齐的纯文本表格"""
    widths = [len(h) for h in headers]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    out: List[str] = [line(headers), line(["-" * w for w in widths])]
    out.extend(line(row) for row in rows)
    return "\n".join(out)


def render_key_values(pairs: Sequence[Sequence[str]]) -> str:
    """键值对，每行一个"""
    width = max((len(k) for k, _ in pairs), default=0)
    return "\n".join(f"{k.ljust(width)} : {v}" for k, v in pairs)
