"""
FilterStab 版本信息

作者: FilterStab 开发团队
"""

__version__ = "1.0.0"
__author__ = "FilterStab Team"
__build_date__ = "2026-10-19"
__license__ = "MIT"
__description__ = "Nonlinear filter stability via Dobrushin coefficients"


def get_version_info():
    """
    获取完整版本信息

    Returns:
        dict: 包含版本信息的字典
    """
    return {
        "version": __version__,
        "author": __author__,
        "build_date": __build_date__,
        "license": __license__,
        "description": __description__,
    }
