"""精确整数线性代数：Hermite / Smith 标准形、格成员判定、饱和化与余核。

HNF 约定：列运算、下三角。hnf(m) 返回 (h, u)，满足 h = m·u，u 为幺模矩阵；
h 的主元从上到下严格右移，主元为正，主元左侧同一行的元素约化到 [0, 主元)，
零列排在最后。SNF 约定：d = u·m·v，对角元非负、依次整除、零排在最后。
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from sympy.polys.domains import ZZ

from config.settings import settings
from utils.errors import ComputationError, DimensionMismatch

logger = logging.getLogger(__name__)

Vector = Tuple[int, ...]


def _as_int(value) -> int:
    if isinstance(value, bool):
        raise ComputationError("布尔值不是矩阵元素")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        return int(value.strip())
    if isinstance(value, Fraction) and value.denominator == 1:
        return value.numerator
    try:
        as_int = int(value)
    except (TypeError, ValueError) as exc:
        raise ComputationError(f"非整数矩阵元素: {value!r}") from exc
    if as_int != value:
        raise ComputationError(f"非整数矩阵元素: {value!r}")
    return as_int


@dataclass(frozen=True)
class IntMatrix:
    """不可变的任意精度整数矩阵（行主序）"""

    rows: int
    cols: int
    entries: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        entries = tuple(tuple(_as_int(x) for x in row) for row in self.entries)
        if self.rows < 0 or self.cols < 0:
            raise DimensionMismatch("矩阵维数必须非负")
        if len(entries) != self.rows or any(len(row) != self.cols for row in entries):
            raise DimensionMismatch(
                f"元素个数与形状 {self.rows}x{self.cols} 不符"
            )
        object.__setattr__(self, "entries", entries)

    # ---- 构造 ----

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: Optional[int] = None) -> "IntMatrix":
        rows = [list(r) for r in rows]
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(len(rows), cols, tuple(tuple(r) for r in rows))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: Optional[int] = None) -> "IntMatrix":
        columns = [list(c) for c in columns]
        if rows is None:
            if not columns:
                raise DimensionMismatch("空列集合需要显式给出行数")
            rows = len(columns[0])
        if any(len(c) != rows for c in columns):
            raise DimensionMismatch("列向量长度不一致")
        return cls(rows, len(columns), tuple(tuple(c[i] for c in columns) for i in range(rows)))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(n, n, tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "IntMatrix":
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def diagonal(cls, values: Sequence[int]) -> "IntMatrix":
        n = len(values)
        return cls(n, n, tuple(tuple(values[i] if i == j else 0 for j in range(n)) for i in range(n)))

    @classmethod
    def from_json(cls, data) -> "IntMatrix":
        """从十进制字符串（或整数）的二维数组读取"""
        if isinstance(data, dict):
            return cls(int(data["rows"]), int(data["cols"]), tuple(tuple(r) for r in data["entries"]))
        if not isinstance(data, list) or any(not isinstance(r, list) for r in data):
            raise ComputationError("矩阵 JSON 必须是二维数组")
        return cls.from_rows(data)

    def to_json(self) -> List[List[str]]:
        return [[str(x) for x in row] for row in self.entries]

    # ---- 访问 ----

    def __getitem__(self, key: Tuple[int, int]) -> int:
        i, j = key
        return self.entries[i][j]

    def row(self, i: int) -> Vector:
        return self.entries[i]

    def column(self, j: int) -> Vector:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> List[Vector]:
        return [self.column(j) for j in range(self.cols)]

    def to_lists(self) -> List[List[int]]:
        return [list(row) for row in self.entries]

    @property
    def is_square(self) -> bool:
        return self.rows == self.cols

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def is_identity(self) -> bool:
        return self.is_square and self == IntMatrix.identity(self.rows)

    # ---- 运算 ----

    def __matmul__(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.rows:
            raise DimensionMismatch(f"无法相乘: {self.rows}x{self.cols} @ {other.rows}x{other.cols}")
        other_cols = other.columns()
        return IntMatrix(
            self.rows,
            other.cols,
            tuple(tuple(sum(a * b for a, b in zip(row, col)) for col in other_cols) for row in self.entries),
        )

    def apply(self, vector: Sequence[int]) -> Vector:
        """矩阵乘列向量"""
        if len(vector) != self.cols:
            raise DimensionMismatch(f"向量长度 {len(vector)} 与列数 {self.cols} 不符")
        return tuple(sum(a * b for a, b in zip(row, vector)) for row in self.entries)

    def __add__(self, other: "IntMatrix") -> "IntMatrix":
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries)
        ))

    def __sub__(self, other: "IntMatrix") -> "IntMatrix":
        self._check_same_shape(other)
        return IntMatrix(self.rows, self.cols, tuple(
            tuple(a - b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries)
        ))

    def __neg__(self) -> "IntMatrix":
        return self.scale(-1)

    def scale(self, k: int) -> "IntMatrix":
        return IntMatrix(self.rows, self.cols, tuple(tuple(k * x for x in row) for row in self.entries))

    def transpose(self) -> "IntMatrix":
        return IntMatrix(self.cols, self.rows, tuple(self.columns()))

    def power(self, k: int) -> "IntMatrix":
        if not self.is_square:
            raise DimensionMismatch("只有方阵可以求幂")
        if k < 0:
            raise ComputationError("不支持负指数")
        result = IntMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def hstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.rows != other.rows:
            raise DimensionMismatch("水平拼接要求行数相同")
        return IntMatrix(self.rows, self.cols + other.cols, tuple(
            r1 + r2 for r1, r2 in zip(self.entries, other.entries)
        ))

    def vstack(self, other: "IntMatrix") -> "IntMatrix":
        if self.cols != other.cols:
            raise DimensionMismatch("垂直拼接要求列数相同")
        return IntMatrix(self.rows + other.rows, self.cols, self.entries + other.entries)

    def det(self) -> int:
        """Bareiss 无分数消元求行列式"""
        if not self.is_square:
            raise DimensionMismatch("只有方阵有行列式")
        n = self.rows
        if n == 0:
            return 1
        a = self.to_lists()
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
                if swap is None:
                    return 0
                a[k], a[swap] = a[swap], a[k]
                sign = -sign
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            prev = a[k][k]
        return sign * a[n - 1][n - 1]

    def _check_same_shape(self, other: "IntMatrix"):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise DimensionMismatch("矩阵形状不同")


def _check_size(m: IntMatrix):
    if max(m.rows, m.cols) > settings.MAX_MATRIX_DIM:
        raise ComputationError(
            f"矩阵 {m.rows}x{m.cols} 超过上限 {settings.MAX_MATRIX_DIM}"
        )


# ---- 列运算 / 行运算（在可变列表上） ----

def _col_combine(a: List[List[int]], p: int, q: int, s: int, t: int, x: int, y: int):
    """同时替换第 p、q 列: col_p <- s*col_p + t*col_q, col_q <- x*col_p + y*col_q"""
    for row in a:
        cp, cq = row[p], row[q]
        row[p] = s * cp + t * cq
        row[q] = x * cp + y * cq


def _col_addmul(a: List[List[int]], target: int, source: int, k: int):
    if k:
        for row in a:
            row[target] += k * row[source]


def _col_negate(a: List[List[int]], j: int):
    for row in a:
        row[j] = -row[j]


def _col_swap(a: List[List[int]], p: int, q: int):
    for row in a:
        row[p], row[q] = row[q], row[p]


def _hnf_work(m: IntMatrix) -> Tuple[List[List[int]], List[List[int]], List[Tuple[int, int]]]:
    a = m.to_lists()
    u = IntMatrix.identity(m.cols).to_lists()
    pivots: List[Tuple[int, int]] = []
    pc = 0
    for i in range(m.rows):
        if pc >= m.cols:
            break
        for j in range(pc + 1, m.cols):
            if a[i][j] == 0:
                continue
            x, y = a[i][pc], a[i][j]
            s, t, g = (int(v) for v in ZZ.gcdex(ZZ(x), ZZ(y)))
            # 列变换矩阵 [[s, -y/g], [t, x/g]] 的行列式为 1
            _col_combine(a, pc, j, s, t, -y // g, x // g)
            _col_combine(u, pc, j, s, t, -y // g, x // g)
        if a[i][pc] == 0:
            continue
        if a[i][pc] < 0:
            _col_negate(a, pc)
            _col_negate(u, pc)
        piv = a[i][pc]
        for k in range(pc):
            q = a[i][k] // piv
            _col_addmul(a, k, pc, -q)
            _col_addmul(u, k, pc, -q)
        pivots.append((i, pc))
        pc += 1
    return a, u, pivots


def hnf(m: IntMatrix) -> Tuple[IntMatrix, IntMatrix]:
    """
    列 Hermite 标准形

    Args:
        m: 任意整数矩阵

    Returns:
        (h, u): h = m·u，u 幺模，h 为下三角列阶梯形
    """
    _check_size(m)
    a, u, _ = _hnf_work(m)
    return IntMatrix.from_rows(a, m.cols), IntMatrix.from_rows(u, m.cols)


def hnf_pivots(m: IntMatrix) -> List[Tuple[int, int]]:
    """HNF 主元位置 (行, 列)"""
    _check_size(m)
    return _hnf_work(m)[2]


def rank(m: IntMatrix) -> int:
    """有理秩"""
    return len(hnf_pivots(m))


def stable_rank(m: IntMatrix) -> int:
    """方阵 A 的稳定秩 rank(A^r)，即 A 在 Q 上非幂零部分的维数"""
    if not m.is_square:
        raise DimensionMismatch("稳定秩只对方阵定义")
    return rank(m.power(m.rows))


def snf(m: IntMatrix) -> Tuple[IntMatrix, IntMatrix, IntMatrix]:
    """
    Smith 标准形

    Args:
        m: 任意整数矩阵

    Returns:
        (d, u, v): d = u·m·v，d 对角、d_i | d_{i+1}、非负、零在末尾
    """
    _check_size(m)
    rows, cols = m.rows, m.cols
    a = m.to_lists()
    left = IntMatrix.identity(rows).to_lists()
    right = IntMatrix.identity(cols).to_lists()

    for s in range(min(rows, cols)):
        while True:
            # 把右下块中绝对值最小的非零元移到 (s, s)
            best = None
            for i in range(s, rows):
                for j in range(s, cols):
                    if a[i][j] != 0 and (best is None or abs(a[i][j]) < abs(a[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                break
            bi, bj = best
            if bi != s:
                a[s], a[bi] = a[bi], a[s]
                left[s], left[bi] = left[bi], left[s]
            if bj != s:
                _col_swap(a, s, bj)
                _col_swap(right, s, bj)

            piv = a[s][s]
            clean = True
            for i in range(s + 1, rows):
                q = a[i][s] // piv
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[s])]
                    left[i] = [x - q * y for x, y in zip(left[i], left[s])]
                if a[i][s] != 0:
                    clean = False
            for j in range(s + 1, cols):
                q = a[s][j] // piv
                if q:
                    _col_addmul(a, j, s, -q)
                    _col_addmul(right, j, s, -q)
                if a[s][j] != 0:
                    clean = False
            if not clean:
                continue

            # 保证主元整除右下块的全部元素
            bad = next(
                (i for i in range(s + 1, rows) for j in range(s + 1, cols) if a[i][j] % piv != 0),
                None,
            )
            if bad is None:
                break
            a[s] = [x + y for x, y in zip(a[s], a[bad])]
            left[s] = [x + y for x, y in zip(left[s], left[bad])]

        if a[s][s] < 0:
            a[s] = [-x for x in a[s]]
            left[s] = [-x for x in left[s]]

    return (
        IntMatrix.from_rows(a, cols),
        IntMatrix.from_rows(left, rows),
        IntMatrix.from_rows(right, cols),
    )


def snf_diagonal(m: IntMatrix) -> List[int]:
    """SNF 对角元（长度 min(rows, cols)）"""
    d, _, _ = snf(m)
    return [d[i, i] for i in range(min(m.rows, m.cols))]


def inverse_unimodular(u: IntMatrix) -> IntMatrix:
    """幺模矩阵的整数逆；非幺模时报错"""
    if not u.is_square:
        raise DimensionMismatch("只有方阵可逆")
    h, w = hnf(u)
    if not h.is_identity():
        raise ComputationError("矩阵不是幺模的")
    return w


def solve_integer(m: IntMatrix, x: Sequence[int]) -> Optional[Vector]:
    """求整数解 y 使 m·y = x；无整数解返回 None。m 的列不必线性无关。"""
    if len(x) != m.rows:
        raise DimensionMismatch(f"向量长度 {len(x)} 与环境秩 {m.rows} 不符")
    _check_size(m)
    a, u, pivots = _hnf_work(m)
    z = [0] * m.cols
    for t, (p, col) in enumerate(pivots):
        acc = x[p] - sum(a[p][s] * z[s] for s in range(t))
        if acc % a[p][col] != 0:
            return None
        z[t] = acc // a[p][col]
    # 非主元行上也必须吻合
    for i in range(m.rows):
        if sum(a[i][s] * z[s] for s in range(len(pivots))) != x[i]:
            return None
    return tuple(sum(u[r][s] * z[s] for s in range(m.cols)) for r in range(m.cols))


def kernel_basis(m: IntMatrix) -> IntMatrix:
    """整数核 {y : m·y = 0} 的一组基（按列），它是 Z^cols 的直和项"""
    _check_size(m)
    _, u, pivots = _hnf_work(m)
    r = len(pivots)
    return IntMatrix.from_columns([[row[j] for row in u] for j in range(r, m.cols)], m.cols)


@dataclass(frozen=True)
class Lattice:
    """Z^r 中的子格，basis 的列线性无关（按 HNF 规范化）"""

    ambient_rank: int
    basis: IntMatrix

    def __post_init__(self):
        if self.basis.rows != self.ambient_rank:
            raise DimensionMismatch("基矩阵行数必须等于环境秩")
        if self.basis.cols and rank(self.basis) != self.basis.cols:
            raise ComputationError("格的基向量必须线性无关")

    @classmethod
    def span(cls, generators: IntMatrix) -> "Lattice":
        """由任意生成元（列）张成的格，自动去掉相关列"""
        h, _ = hnf(generators)
        nonzero = [c for c in h.columns() if any(c)]
        return cls(generators.rows, IntMatrix.from_columns(nonzero, generators.rows))

    @classmethod
    def full(cls, n: int) -> "Lattice":
        return cls(n, IntMatrix.identity(n))

    @property
    def rank(self) -> int:
        return self.basis.cols

    def contains(self, x: Sequence[int]) -> bool:
        return lattice_membership(x, self) is not None

    def vectors(self) -> List[Vector]:
        return self.basis.columns()


def lattice_membership(x: Sequence[int], l: Lattice) -> Optional[Vector]:
    """
    格成员判定

    Args:
        x: 整数向量，长度等于 l 的环境秩
        l: 格

    Returns:
        x 在 l 的基下的整数坐标；x 不在 l 中时返回 None
    """
    if len(x) != l.ambient_rank:
        raise DimensionMismatch(f"向量长度 {len(x)} 与格的环境秩 {l.ambient_rank} 不符")
    if l.rank == 0:
        return () if not any(x) else None
    coeffs = solve_integer(l.basis, x)
    if coeffs is not None and l.basis.apply(coeffs) != tuple(x):
        raise ComputationError("格成员判定的回代结果不一致")
    return coeffs


def saturation_index(l: Lattice) -> int:
    """[saturate(l) : l]，等于包含矩阵非零不变因子之积"""
    index = 1
    for d in snf_diagonal(l.basis):
        if d:
            index *= d
    return index


def saturate(l: Lattice) -> Lattice:
    """{x : 存在 N > 0 使 Nx ∈ l}，结果是环境格的直和项"""
    if l.rank == 0:
        return l
    d, u, _ = snf(l.basis)
    u_inv = inverse_unimodular(u)
    k = sum(1 for i in range(min(d.rows, d.cols)) if d[i, i] != 0)
    sat = IntMatrix.from_columns([u_inv.column(j) for j in range(k)], l.ambient_rank)
    return Lattice.span(sat)


def lattice_in(sub: Lattice, sup: Lattice) -> bool:
    """sub ⊆ sup"""
    return all(sup.contains(v) for v in sub.vectors())


def relative_coordinates(sub: Lattice, sup: Lattice) -> IntMatrix:
    """sub 的基在 sup 的基下的坐标矩阵；要求 sub ⊆ sup"""
    cols = []
    for v in sub.vectors():
        coeffs = lattice_membership(v, sup)
        if coeffs is None:
            raise ComputationError("子格不包含在给定的格中")
        cols.append(coeffs)
    return IntMatrix.from_columns(cols, sup.rank)


@dataclass(frozen=True)
class AbelianGroupPresentation:
    """Z^r / im(relations) 的有限表现，不变因子在构造时缓存"""

    generators: int
    relations: IntMatrix
    invariant_factors: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.relations.rows != self.generators:
            raise DimensionMismatch("关系矩阵行数必须等于生成元个数")
        factors = tuple(d for d in snf_diagonal(self.relations) if d != 0)
        object.__setattr__(self, "invariant_factors", factors)

    @property
    def free_rank(self) -> int:
        return self.generators - len(self.invariant_factors)

    @property
    def torsion(self) -> Tuple[int, ...]:
        return tuple(d for d in self.invariant_factors if d > 1)

    @property
    def exponent(self) -> int:
        """挠部分的指数；无挠时为 1"""
        return self.torsion[-1] if self.torsion else 1

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def is_annihilated_by(self, n: int) -> bool:
        return self.free_rank == 0 and all(n % d == 0 for d in self.torsion)

    def describe(self) -> str:
        parts = []
        if self.free_rank:
            parts.append("ℤ" if self.free_rank == 1 else f"ℤ^{self.free_rank}")
        parts.extend(f"ℤ/{d}" for d in self.torsion)
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": [str(d) for d in self.torsion]}


def cokernel(m: IntMatrix) -> AbelianGroupPresentation:
    """Z^rows / im(m) 的不变因子分解"""
    return AbelianGroupPresentation(m.rows, m)


def quotient_group(sup: Lattice, sub: Lattice) -> AbelianGroupPresentation:
    """sup / sub，要求 sub ⊆ sup"""
    if sup.rank == 0:
        return AbelianGroupPresentation(0, IntMatrix.zeros(0, 0))
    if sub.rank == 0:
        return AbelianGroupPresentation(sup.rank, IntMatrix.zeros(sup.rank, 0))
    return cokernel(relative_coordinates(sub, sup))