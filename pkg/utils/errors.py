"""计算器的异常层次。

SpecValidationError 对应输入规格错误（CLI 退出码 2），
InvariantViolation 对应内部一致性失败（退出码 1），
ComputationError 对应调用方传入了不满足前置条件的参数（退出码 1）。
"""


class KTheoryError(Exception):
    """所有计算错误的基类"""


# ---- 规格校验 ----

class SpecValidationError(KTheoryError):
    """域规格文件不合法"""


class SpecFormatError(SpecValidationError):
    """规格文件缺少字段或字段格式错误"""


class NotMonic(SpecValidationError):
    """定义多项式不是首一的"""


class NotSquarefree(SpecValidationError):
    """定义多项式在 Q 上不是无平方因子的"""


class BasisNotClosed(SpecValidationError):
    """整基在乘法下不封闭（结构常数非整数）"""


class ZetaNotIntegral(SpecValidationError):
    """ζ 不在整基张成的环中"""


class ZetaOrderWrong(SpecValidationError):
    """ζ 的阶不等于声明的 m"""


class ZetaActionNotFree(SpecValidationError):
    """某个 1 - Z^i 奇异，μ 在 R∖{0} 上的作用不自由"""


# ---- 内部不变量 ----

class InvariantViolation(KTheoryError):
    """内部一致性检查失败，说明实现有误而非输入有误"""


# ---- 前置条件 ----

class ComputationError(KTheoryError, ValueError):
    """参数不满足运算的前置条件"""


class DimensionMismatch(ComputationError):
    """向量或矩阵维数不匹配"""


class ZeroModulus(ComputationError):
    """理想生成元为零"""


class NotAdmissible(ComputationError):
    """c 不被 D = ∏(1 - ζ^i) 整除"""


class InfiniteOrderGenerator(ComputationError):
    """生成元 (b, ζ^i) 的阶无限"""


class UncertifiedIntegralRequest(ComputationError):
    """没有三角化证书却要求整数结构的余极限"""


class CertificateMismatch(ComputationError):
    """证书与矩阵不一致"""


class ShapeMismatch(ComputationError):
    """β 的分块与分次群的秩不匹配"""


class NotASubgroup(ComputationError):
    """给定子集不是子群"""


class NotARepresentation(ComputationError):
    """作用矩阵不构成表示"""


class GroupTooLarge(ComputationError):
    """群的阶超过特征标表的上限"""


class TooManyPoints(ComputationError):
    """商环 R/cR 太大，超过置换计算上限"""
