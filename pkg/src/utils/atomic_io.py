"""
Atomic IO - 原子文件写入

先写入同目录下的临时文件，再用 os.replace 重命名到目标路径，
读者永远看不到写了一半的文件。

作者: FilterStab 开发团队
版本: v1.0
日期: 2026-10-19
"""

import csv
import io
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, Sequence, Union


logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def atomic_write_bytes(path: PathLike, payload: bytes) -> Path:
    """
    原子写入字节

    Args:
        path: 目标路径（父目录不存在时创建）
        payload: 内容

    Returns:
        Path: 目标路径

    Raises:
        OSError: 写入或重命名失败（临时文件会被清理）
    """
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, 'wb') as f:
            f.write(payload)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_name, target)
    except BaseException:
        try:
            os.unlink(tmp_name)
        except FileNotFoundError:
            pass
        raise
    logger.debug(f"Wrote {len(payload)} bytes to {target}")
    return target


def atomic_write_text(path: PathLike, text: str) -> Path:
    return atomic_write_bytes(path, text.encode('utf-8'))


def atomic_write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    """按固定列顺序原子写入 CSV（换行符统一为 \\n）"""
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    target = atomic_write_text(path, buffer.getvalue())
    logger.info(f"CSV written: {target}")
    return target
