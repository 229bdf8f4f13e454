"""结构映射 η_c 的计算。

有限部分：每个基类 [p_χ((b, ζ^i))] 的像由仿射置换 π(d) = red(ζ^{-i}(d - b)) 在 𝓡_c 上的
圈分解给出。从 d_0 出发、长度为 j 的圈贡献对角元 u^{b̃} s_{ζ^{ij}}，其中
b̃ = c^{-1}((Z^{ij} - 1) d_0 + (1 + Z^i + … + Z^{i(j-1)}) b)；
ζ^{ij} = 1 时贡献 [1]，否则贡献限制特征标的谱投影类。
无限部分：k 次部分的有理秩 d_k = (1/m) Σ_j tr Λ^k(Z^j)，η_c 在其上作用为 c^{n-k}。
"""
import logging
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Tuple

from sympy import Matrix, symbols

from config.settings import settings
from exact_linalg import IntMatrix
from k0_classes import K0Label, K0Vector
from number_field import Order, OrderElement, QuotientRing, is_admissible, quotient
from semidirect_group import FiniteSubgroupLabel, enumerate_maximal_classes, spectral_class
from utils.audit_logger import AuditLogger
from utils.errors import InfiniteOrderGenerator, InvariantViolation, NotAdmissible

logger = logging.getLogger(__name__)

_T = symbols("t")


# ---- 无限部分的秩 ----

def _exterior_traces(a: IntMatrix) -> List[int]:
    """e_0, …, e_n：Λ^k a 的迹，即特征多项式系数（带符号）"""
    coeffs = Matrix(a.to_lists()).charpoly(_T).all_coeffs()
    return [int((-1) ** k * coeffs[k]) for k in range(len(coeffs))]


@lru_cache(maxsize=None)
def all_invariant_ranks(o: Order) -> Tuple[int, ...]:
    """d̂_0, …, d̂_n：(Λ^k R_Q)^μ 的维数"""
    totals = [0] * (o.n + 1)
    for j in range(o.m):
        for k, e in enumerate(_exterior_traces(o.zeta_power(j))):
            totals[k] += e
    ranks = []
    for k, total in enumerate(totals):
        if total % o.m != 0 or total < 0:
            raise InvariantViolation(f"{o.name}: d̂_{k} = {total}/{o.m} 不是非负整数")
        ranks.append(total // o.m)
    return tuple(ranks)


def inf_ranks(o: Order) -> List[int]:
    """偶数次 d_0, d_2, …（下标 t 对应 k = 2t）"""
    return list(all_invariant_ranks(o)[0::2])


def molien_alternating_check(o: Order) -> Tuple[bool, Fraction, Fraction]:
    """Σ_k (-1)^k d̂_k 与 (1/m) Σ_j det(1 - Z^j) 的比较"""
    lhs = Fraction(sum((-1) ** k * d for k, d in enumerate(all_invariant_ranks(o))))
    rhs = Fraction(sum(o.one_minus_zeta_power(j).det() for j in range(o.m)), o.m)
    return lhs == rhs, lhs, rhs


def delta(o: Order) -> int:
    """δ = 1 当且仅当 n 为偶数；与顶次不变量 d̂_n 交叉检查"""
    value = 1 if o.n % 2 == 0 else 0
    top = all_invariant_ranks(o)[o.n]
    if top != value:
        raise InvariantViolation(f"{o.name}: δ = {value} 但 d̂_n = {top}")
    return value


def rank_k_inf(o: Order) -> int:
    return sum(inf_ranks(o))


# ---- 仿射置换 ----

@dataclass(frozen=True)
class AffinePermutation:
    """𝓡_c 上的置换 π(d) = red(ζ^{-i}(d - b))，点按字典序编号"""

    quotient: QuotientRing
    b: OrderElement
    i: int
    image: Tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.image)

    def is_bijection(self) -> bool:
        return len(set(self.image)) == len(self.image)

    def cycles(self) -> List[List[int]]:
        """圈分解，每个圈从其最小下标开始，按起点升序"""
        seen = bytearray(len(self.image))
        out = []
        for start in range(len(self.image)):
            if seen[start]:
                continue
            cycle = []
            x = start
            while not seen[x]:
                seen[x] = 1
                cycle.append(x)
                x = self.image[x]
            out.append(cycle)
        return out

    def census(self) -> Dict[int, int]:
        counts = Counter(len(c) for c in self.cycles())
        return dict(sorted(counts.items()))

    def apply(self, d: OrderElement) -> OrderElement:
        return self.quotient.element(self.image[self.quotient.index(d)])


def affine_permutation(o: Order, c: int, b: OrderElement, i: int) -> AffinePermutation:
    """构造 π(d) = red(ζ^{-i}(d - b))"""
    quot = quotient(o, c)
    quot.check_size()
    w = o.zeta_power(-i).entries
    shift = [(-v) % c for v in o.zeta_power(-i).apply(b.coords)]
    n = o.n
    image = []
    for d in quot.reps():
        coords = d.coords
        idx = 0
        for r in range(n):
            row = w[r]
            idx = idx * c + (sum(row[s] * coords[s] for s in range(n)) + shift[r]) % c
        image.append(idx)
    perm = AffinePermutation(quot, b, i % o.m, tuple(image))
    if not perm.is_bijection():
        raise InvariantViolation(f"{o.name}: c={c} 时仿射映射不是双射")
    return perm


# ---- 圈类 ----

def _check_admissible(o: Order, c: int):
    if not is_admissible(o, c):
        raise NotAdmissible(f"{o.name}: c={c} 不被 D 整除")


def cycle_classes(o: Order, c: int, b: OrderElement, i: int, chi: int) -> K0Vector:
    """
    η_c([p_χ((b, ζ^i))])

    Args:
        o: 整数环
        c: 可容许模数
        b, i: 有限阶生成元 (b, ζ^i)
        chi: 特征标下标（相对于该生成元）

    Returns:
        K0Vector: 各圈贡献之和
    """
    _check_admissible(o, c)
    i %= o.m
    if i == 0 and not b.is_zero():
        raise InfiniteOrderGenerator("生成元 (b, 1) 的阶无限")
    q0 = o.m // gcd(i, o.m)

    perm = affine_permutation(o, c, b, i)
    quot = perm.quotient
    acc: Dict[K0Label, Fraction] = {}

    def add(vec: K0Vector):
        for label, value in vec:
            acc[label] = acc.get(label, Fraction(0)) + value

    for cycle in perm.cycles():
        j = len(cycle)
        if q0 % j != 0:
            raise InvariantViolation(f"圈长 {j} 不整除生成元的阶 {q0}")
        d0 = quot.element(cycle[0])
        rot = (i * j) % o.m
        geometric = [0] * o.n
        for k in range(j):
            for r, v in enumerate(o.zeta_power(i * k).apply(b.coords)):
                geometric[r] += v
        moved = o.zeta_power(rot).apply(d0.coords)
        numer = [moved[r] - d0.coords[r] + geometric[r] for r in range(o.n)]
        if any(v % c for v in numer):
            raise InvariantViolation(f"累积平移 {numer} 不能被 c={c} 整除")
        b_tilde = OrderElement(tuple(v // c for v in numer))
        if rot == 0:
            if not b_tilde.is_zero():
                raise InvariantViolation("整周期圈的累积平移非零")
            add(K0Vector.of(K0Label.unit()))
        else:
            add(spectral_class(o, b_tilde, rot, chi % (q0 // j)))
    return K0Vector.from_dict(acc)


def unit_column(o: Order, c: int) -> K0Vector:
    return K0Vector.of(K0Label.unit(), c ** o.n)


def eta_column(o: Order, c: int, label: K0Label) -> K0Vector:
    """η_c 在一个有限基标签上的像"""
    if label.kind == "unit":
        return unit_column(o, c)
    if label.kind == "mu":
        return cycle_classes(o, c, o.zero(), 1, label.chi)
    if label.kind == "fin":
        gen = label.subgroup
        return cycle_classes(o, c, OrderElement(gen.b), gen.i, label.chi)
    raise InvariantViolation(f"无限部分标签 {label} 没有有限列")


def _column_worker(args) -> K0Vector:
    o, c, label = args
    return eta_column(o, c, label)


def finite_basis(o: Order) -> List[K0Label]:
    """[1]，非 μ 极大类上的 Fin 标签，Mu 标签"""
    labels = [K0Label.unit()]
    for l in enumerate_maximal_classes(o):
        if l.is_mu():
            continue
        labels.extend(K0Label.fin(l, t) for t in range(1, l.order(o.m)))
    labels.extend(K0Label.mu(t) for t in range(1, o.m))
    return labels


@dataclass(frozen=True)
class EtaMatrix:
    """η_c：有限块为整数矩阵，无限块记为 (k, n-k, d_k) 的对角多重集"""

    c: int
    n: int
    m: int
    basis: Tuple[K0Label, ...]
    finite_block: IntMatrix
    inf_exponents: Tuple[Tuple[int, int, int], ...]

    def column(self, label: K0Label) -> K0Vector:
        j = self.basis.index(label)
        return K0Vector.from_dict({self.basis[r]: self.finite_block[r, j] for r in range(len(self.basis))})

    def inf_labels(self) -> List[K0Label]:
        return [K0Label.inf(k, idx) for k, _, mult in self.inf_exponents if k > 0 for idx in range(mult)]

    def inf_diagonal(self) -> List[str]:
        out = []
        for _, exponent, mult in self.inf_exponents:
            out.extend([f"c^{exponent}"] * mult)
        return out

    def full_basis(self) -> List[K0Label]:
        return [self.basis[0]] + self.inf_labels() + list(self.basis[1:])

    def diagonal_exponents(self) -> List[Optional[int]]:
        """全基上的对角证书：无限方向给出 c 的指数，Mu 方向为 0，Fin 方向幂零记为 None"""
        exps: List[Optional[int]] = [self.n]
        for k, exponent, mult in self.inf_exponents:
            if k > 0:
                exps.extend([exponent] * mult)
        for label in self.basis[1:]:
            exps.append(0 if label.kind == "mu" else None)
        return exps

    def full_matrix(self) -> IntMatrix:
        """全基（[1], Inf…, Fin…, Mu…）上在具体 c 处取值的矩阵；Inf 行在有限列上为零"""
        inf = [(k, e) for k, e, mult in self.inf_exponents if k > 0 for _ in range(mult)]
        size = len(self.basis) + len(inf)
        rows = [[0] * size for _ in range(size)]
        fin_pos = [0] + list(range(1 + len(inf), size))
        for a, ra in enumerate(fin_pos):
            for bidx, cb in enumerate(fin_pos):
                rows[ra][cb] = self.finite_block[a, bidx]
        for t, (_, exponent) in enumerate(inf):
            rows[1 + t][1 + t] = self.c ** exponent
        return IntMatrix.from_rows(rows, size)

    def finite_product(self, other: "EtaMatrix") -> IntMatrix:
        if self.basis != other.basis:
            raise InvariantViolation("两个 η 矩阵的基不同")
        return self.finite_block @ other.finite_block

    def to_json(self) -> Dict:
        return {
            "c": self.c,
            "basis": [str(label) for label in self.basis],
            "finite_block": self.finite_block.to_json(),
            "inf_diagonal": self.inf_diagonal(),
        }


def verify_eta_shape(eta: EtaMatrix):
    """检查 EtaMatrix 的全部形状不变量，失败时抛出 InvariantViolation"""
    basis = list(eta.basis)
    unit = basis.index(K0Label.unit())
    cn = eta.c ** eta.n
    for j, label in enumerate(basis):
        col = eta.finite_block.column(j)
        if label.kind == "unit":
            expected = [cn if r == unit else 0 for r in range(len(basis))]
            if list(col) != expected:
                raise InvariantViolation("Unit 列不是 c^n·[1]")
        elif label.kind == "fin":
            if any(v for r, v in enumerate(col) if r != unit):
                raise InvariantViolation(f"Fin 列 {label} 不是 [1] 的倍数")
        elif label.kind == "mu":
            for r, other in enumerate(basis):
                if other.kind == "mu" and col[r] != (1 if other == label else 0):
                    raise InvariantViolation(f"Mu 列 {label} 的 Mu 对角块不是单位阵")
    zero_count = sum(mult for _, exponent, mult in eta.inf_exponents if exponent == 0)
    if zero_count > 1 or (zero_count == 1 and eta.n % 2 == 1):
        raise InvariantViolation("c^0 在无限对角上出现的次数不对")
    exponents = [e for _, e, mult in eta.inf_exponents if mult]
    if exponents != sorted(exponents, reverse=True):
        raise InvariantViolation("无限对角上的指数没有递减")


@lru_cache(maxsize=64)
def eta_matrix(o: Order, c: int) -> EtaMatrix:
    """
    组装 η_c

    Args:
        o: 整数环
        c: 可容许模数

    Returns:
        EtaMatrix: 形状不变量已校验
    """
    _check_admissible(o, c)
    basis = finite_basis(o)
    logger.info(f"🔄 计算 η_{c}（{o.name}，{len(basis)} 个有限基）")

    jobs = [(o, c, label) for label in basis]
    if settings.ETA_WORKERS > 1:
        with ProcessPoolExecutor(max_workers=settings.ETA_WORKERS) as pool:
            columns = list(pool.map(_column_worker, jobs))
    else:
        columns = [_column_worker(job) for job in jobs]

    index = {label: r for r, label in enumerate(basis)}
    cols = []
    for label, vec in zip(basis, columns):
        col = [0] * len(basis)
        for target, value in vec:
            if target not in index:
                raise InvariantViolation(f"η_{c}({label}) 落在有限基之外: {target}")
            if value.denominator != 1:
                raise InvariantViolation(f"η_{c}({label}) 的系数 {value} 不是整数")
            col[index[target]] = int(value)
        cols.append(col)

    ranks = all_invariant_ranks(o)
    inf_exponents = tuple((k, o.n - k, ranks[k]) for k in range(0, o.n + 1, 2))
    eta = EtaMatrix(c, o.n, o.m, tuple(basis), IntMatrix.from_columns(cols, len(basis)), inf_exponents)
    verify_eta_shape(eta)
    logger.info(f"✅ η_{c} 计算完成")
    AuditLogger.log_eta_event("computed", o.name, c, {"basis_size": len(basis), "inf_diagonal": eta.inf_diagonal()})
    return eta


def check_multiplicativity(o: Order, c: int, c2: int) -> bool:
    """η_c · η_{c'} = η_{cc'}（有限块）"""
    left = eta_matrix(o, c).finite_product(eta_matrix(o, c2))
    ok = left == eta_matrix(o, c * c2).finite_block
    AuditLogger.log_check_event("eta_multiplicativity", o.name, ok, {"c": c, "c2": c2})
    return ok


def fin_cycle_census_check(o: Order, c: int) -> bool:
    """每个 Fin 生成元的置换只有长度 m/i 的圈，且像为 (c^n·i/m)·[1]"""
    for l in enumerate_maximal_classes(o):
        if l.is_mu():
            continue
        perm = affine_permutation(o, c, OrderElement(l.b), l.i)
        full = o.m // l.i
        if set(perm.census()) != {full}:
            return False
        expected = K0Vector.of(K0Label.unit(), c ** o.n * l.i // o.m)
        for t in range(1, full):
            if cycle_classes(o, c, OrderElement(l.b), l.i, t) != expected:
                return False
    return True
