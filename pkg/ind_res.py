"""有限群上的诱导/限制：表示环、双陪集公式与范数映射的零化界。

有限群以乘法表给出（元素为下标），子群为元素下标的集合。
特征标表用 Dixon 方法在 GF(p) 上求出（p ≡ 1 mod E，E 为群的指数），
再把每个特征标值提升为 Z[ζ_E] 中的特征值重数向量：值 (m_0, …, m_{E-1}) 表示 Σ m_t ζ^t。
内积在 Z[C_E] 中累加，最后模分圆多项式 Φ_E 约化为整数。
"""
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import isqrt, lcm
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from sympy import Poly, cyclotomic_poly, isprime, symbols
from sympy.combinatorics.named_groups import (
    AbelianGroup,
    AlternatingGroup,
    CyclicGroup,
    DihedralGroup,
    SymmetricGroup,
)
from sympy.ntheory import primitive_root

from config.settings import settings
from exact_linalg import (
    AbelianGroupPresentation,
    IntMatrix,
    Lattice,
    kernel_basis,
    quotient_group,
)
from utils.audit_logger import AuditLogger
from utils.errors import (
    ComputationError,
    GroupTooLarge,
    InvariantViolation,
    NotARepresentation,
    NotASubgroup,
)

logger = logging.getLogger(__name__)

_X = symbols("x")

CyclotomicValue = Tuple[int, ...]


# ---- 有限群 ----

@dataclass(frozen=True, eq=False)
class FiniteGroup:
    """乘法表给出的有限群；下标 0 为单位元"""

    name: str
    table: Tuple[Tuple[int, ...], ...]
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.table)
        if n > settings.MAX_GROUP_ORDER:
            raise GroupTooLarge(f"{self.name}: 阶 {n} 超过上限 {settings.MAX_GROUP_ORDER}")
        if n == 0 or any(len(row) != n for row in self.table):
            raise ComputationError(f"{self.name}: 乘法表不是方阵")
        if any(not 0 <= x < n for row in self.table for x in row):
            raise ComputationError(f"{self.name}: 乘法表不封闭")
        if list(self.table[0]) != list(range(n)) or [row[0] for row in self.table] != list(range(n)):
            raise ComputationError(f"{self.name}: 下标 0 不是单位元")
        for a in range(n):
            if 0 not in self.table[a]:
                raise ComputationError(f"{self.name}: 元素 {a} 没有逆元")
        t = self.table
        for a in range(n):
            for b in range(n):
                ab = t[a][b]
                for c in range(n):
                    if t[ab][c] != t[a][t[b][c]]:
                        raise ComputationError(f"{self.name}: 结合律在 ({a},{b},{c}) 处不成立")
        if not self.labels:
            object.__setattr__(self, "labels", tuple(str(i) for i in range(n)))

    @classmethod
    def from_table(cls, name: str, table: Sequence[Sequence[int]], labels: Sequence[str] = ()) -> "FiniteGroup":
        return cls(name, tuple(tuple(int(x) for x in row) for row in table), tuple(labels))

    @classmethod
    def from_permutations(cls, name: str, group) -> "FiniteGroup":
        """sympy PermutationGroup → 乘法表（元素按 array_form 排序，单位元在前）"""
        if group.order() > settings.MAX_GROUP_ORDER:
            raise GroupTooLarge(f"{name}: 阶 {group.order()} 超过上限 {settings.MAX_GROUP_ORDER}")
        elements = sorted(group.generate(), key=lambda p: p.array_form)
        index = {tuple(p.array_form): i for i, p in enumerate(elements)}
        table = [[index[tuple((p * q).array_form)] for q in elements] for p in elements]
        return cls.from_table(name, table, [str(p.cyclic_form) for p in elements])

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def identity(self) -> int:
        return 0

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    @cached_property
    def _inverses(self) -> Tuple[int, ...]:
        return tuple(row.index(0) for row in self.table)

    def inverse(self, a: int) -> int:
        return self._inverses[a]

    def power(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inverse(a), -k
        result = 0
        for _ in range(k):
            result = self.mul(result, a)
        return result

    def conjugate_element(self, gamma: int, x: int) -> int:
        """γ x γ^{-1}"""
        return self.mul(self.mul(gamma, x), self.inverse(gamma))

    def element_order(self, a: int) -> int:
        k, x = 1, a
        while x != 0:
            x = self.mul(x, a)
            k += 1
        return k

    @cached_property
    def exponent(self) -> int:
        return lcm(*(self.element_order(a) for a in range(self.order)))

    def whole(self) -> "Subgroup":
        return Subgroup(self, frozenset(range(self.order)))

    def trivial_subgroup(self) -> "Subgroup":
        return Subgroup(self, frozenset({0}))

    def closure(self, generators: Iterable[int]) -> "Subgroup":
        gens = list(generators)
        elements = {0}
        frontier = [0]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self.mul(x, g)
                    if y not in elements:
                        elements.add(y)
                        nxt.append(y)
            frontier = nxt
        return Subgroup(self, frozenset(elements))

    def is_subgroup(self, subset: Iterable[int]) -> bool:
        s = set(subset)
        return 0 in s and all(self.mul(a, self.inverse(b)) in s for a in s for b in s)

    def subgroup(self, subset: Iterable[int]) -> "Subgroup":
        s = frozenset(subset)
        if not self.is_subgroup(s):
            raise NotASubgroup(f"{self.name}: {sorted(s)} 不是子群")
        return Subgroup(self, s)

    @lru_cache(maxsize=None)
    def subgroups(self) -> Tuple["Subgroup", ...]:
        """全部子群：从循环子群出发，两两生成直到稳定；按 (阶, 元素) 排序"""
        found = {self.closure([a]) for a in range(self.order)}
        while True:
            current = list(found)
            added = False
            for i, h in enumerate(current):
                for k in current[i + 1:]:
                    joined = self.closure(h.elements | k.elements)
                    if joined not in found:
                        found.add(joined)
                        added = True
            if not added:
                break
        return tuple(sorted(found, key=lambda s: (s.order, sorted(s.elements))))

    def is_normal(self, h: "Subgroup") -> bool:
        return all(h.conjugate_by(g) == h for g in range(self.order))

    def double_cosets(self, h: "Subgroup", k: "Subgroup") -> List[Tuple[int, FrozenSet[int]]]:
        """H\\G/K：(最小代表元, 双陪集)，按代表元排序"""
        seen = set()
        out = []
        for g in range(self.order):
            if g in seen:
                continue
            coset = frozenset(self.mul(self.mul(x, g), y) for x in h.elements for y in k.elements)
            seen |= coset
            out.append((g, coset))
        return out

    def left_cosets(self, h: "Subgroup") -> List[Tuple[int, FrozenSet[int]]]:
        seen = set()
        out = []
        for g in range(self.order):
            if g in seen:
                continue
            coset = frozenset(self.mul(g, x) for x in h.elements)
            seen |= coset
            out.append((g, coset))
        return out

    def quotient(self, h: "Subgroup") -> Tuple["FiniteGroup", List[int]]:
        """G/H（H 正规）与各陪集的代表元"""
        if not self.is_normal(h):
            raise NotASubgroup(f"{self.name}: 子群不是正规子群，不能取商")
        cosets = self.left_cosets(h)
        reps = [g for g, _ in cosets]
        which = {}
        for idx, (_, coset) in enumerate(cosets):
            for x in coset:
                which[x] = idx
        table = [[which[self.mul(a, b)] for b in reps] for a in reps]
        return FiniteGroup.from_table(f"{self.name}/N", table), reps


@dataclass(frozen=True)
class Subgroup:
    group: FiniteGroup
    elements: FrozenSet[int]

    @property
    def order(self) -> int:
        return len(self.elements)

    def is_subgroup_of(self, other: "Subgroup") -> bool:
        return self.group is other.group and self.elements <= other.elements

    def intersection(self, other: "Subgroup") -> "Subgroup":
        return Subgroup(self.group, self.elements & other.elements)

    def conjugate_by(self, gamma: int) -> "Subgroup":
        """γ H γ^{-1}"""
        return Subgroup(self.group, frozenset(self.group.conjugate_element(gamma, x) for x in self.elements))

    @cached_property
    def conjugacy_classes(self) -> Tuple[Tuple[int, ...], ...]:
        """子群内部的共轭类；单位元类在前，其余按最小元排序"""
        g = self.group
        seen = set()
        classes = []
        for x in sorted(self.elements):
            if x in seen:
                continue
            cls = tuple(sorted({g.conjugate_element(y, x) for y in self.elements}))
            seen |= set(cls)
            classes.append(cls)
        return tuple(classes)

    @cached_property
    def class_of(self) -> Dict[int, int]:
        return {x: i for i, cls in enumerate(self.conjugacy_classes) for x in cls}

    def describe(self) -> str:
        labels = self.group.labels
        return "{" + ", ".join(labels[x] for x in sorted(self.elements)) + "}"


# ---- 目录 ----

def _quaternion_table() -> List[List[int]]:
    # 单位 1, i, j, k 的乘积 (符号, 单位)
    unit = [
        [(1, 0), (1, 1), (1, 2), (1, 3)],
        [(1, 1), (-1, 0), (1, 3), (-1, 2)],
        [(1, 2), (-1, 3), (-1, 0), (1, 1)],
        [(1, 3), (1, 2), (-1, 1), (-1, 0)],
    ]

    def idx(sign: int, u: int) -> int:
        return u if sign == 1 else 4 + u

    table = []
    for a in range(8):
        sa, ua = (1 if a < 4 else -1), a % 4
        row = []
        for b in range(8):
            sb, ub = (1 if b < 4 else -1), b % 4
            s, u = unit[ua][ub]
            row.append(idx(sa * sb * s, u))
        table.append(row)
    return table


def _catalog_builders() -> Dict[str, Callable[[], FiniteGroup]]:
    builders: Dict[str, Callable[[], FiniteGroup]] = {
        "C1": lambda: FiniteGroup.from_table("C1", [[0]], ["e"]),
    }
    for n in range(2, 13):
        builders[f"C{n}"] = (lambda n=n: FiniteGroup.from_permutations(f"C{n}", CyclicGroup(n)))
    for n in range(3, 7):
        builders[f"D{n}"] = (lambda n=n: FiniteGroup.from_permutations(f"D{n}", DihedralGroup(n)))
    builders["S3"] = lambda: FiniteGroup.from_permutations("S3", SymmetricGroup(3))
    builders["S4"] = lambda: FiniteGroup.from_permutations("S4", SymmetricGroup(4))
    builders["A4"] = lambda: FiniteGroup.from_permutations("A4", AlternatingGroup(4))
    builders["V4"] = lambda: FiniteGroup.from_permutations("V4", AbelianGroup(2, 2))
    builders["Q8"] = lambda: FiniteGroup.from_table(
        "Q8", _quaternion_table(), ["1", "i", "j", "k", "-1", "-i", "-j", "-k"]
    )
    return builders


_BUILDERS = _catalog_builders()


def catalog_names() -> List[str]:
    return list(_BUILDERS)


@lru_cache(maxsize=None)
def catalog_group(name: str) -> FiniteGroup:
    if name not in _BUILDERS:
        raise ComputationError(f"未知的群: {name}（可选: {', '.join(_BUILDERS)}）")
    return _BUILDERS[name]()


# ---- Z[C_E] 上的值 ----

@lru_cache(maxsize=None)
def _cyclotomic_coeffs(e: int) -> Tuple[int, ...]:
    return tuple(int(c) for c in Poly(cyclotomic_poly(e, _X), _X).all_coeffs())


def _reduce_to_integer(acc: List[int], e: int) -> int:
    """Σ acc[t] ζ_E^t 模 Φ_E 约化；结果必须是有理整数"""
    acc = list(acc)
    phi = _cyclotomic_coeffs(e)
    deg = len(phi) - 1
    for k in range(len(acc) - 1, deg - 1, -1):
        coef = acc[k]
        if coef:
            for idx, c in enumerate(phi):
                acc[k - idx] -= coef * c
    if any(acc[1:deg]):
        raise InvariantViolation(f"内积 {acc} 不是有理数")
    return acc[0]


def _sparse(v: Sequence[int]) -> List[Tuple[int, int]]:
    return [(t, a) for t, a in enumerate(v) if a]


def _accumulate(acc: List[int], x: Sequence[int], y: Sequence[int], weight: int, conj_y: bool = True):
    """acc += weight · x · conj(y)（或 x · y）"""
    e = len(acc)
    sy = _sparse(y)
    for t, a in _sparse(x):
        for s, b in sy:
            acc[(t - s if conj_y else t + s) % e] += weight * a * b


# ---- 特征标表（Dixon，mod p）----

def _nullspace_mod_p(rows: List[List[int]], ncols: int, p: int) -> List[List[int]]:
    a = [[x % p for x in row] for row in rows]
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(a)) if a[i][c]), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        inv = pow(a[r][c], -1, p)
        a[r] = [(x * inv) % p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    basis = []
    for free in (c for c in range(ncols) if c not in pivots):
        v = [0] * ncols
        v[free] = 1
        for i, c in enumerate(pivots):
            v[c] = (-a[i][free]) % p
        basis.append(v)
    return basis


@lru_cache(maxsize=None)
def dixon_prime(group: FiniteGroup) -> Tuple[int, int]:
    """(p, z)：p ≡ 1 mod E，p > 2√|G|；z 为 GF(p) 中的本原 E 次单位根"""
    e = group.exponent
    p = e + 1
    while not (isprime(p) and p * p > 4 * group.order):
        p += e
    z = pow(primitive_root(p), (p - 1) // e, p)
    return p, z


@dataclass(frozen=True)
class CharacterTable:
    subgroup: Subgroup
    exponent: int
    classes: Tuple[Tuple[int, ...], ...]
    degrees: Tuple[int, ...]
    values: Tuple[Tuple[CyclotomicValue, ...], ...]

    @property
    def size(self) -> int:
        return len(self.degrees)

    def value(self, chi: int, g: int) -> CyclotomicValue:
        return self.values[chi][self.subgroup.class_of[g]]


def _class_coefficients(h: Subgroup) -> List[List[List[int]]]:
    """a[i][j][k] = #{x ∈ C_i : x^{-1} z_k ∈ C_j}，z_k 为 C_k 的代表元"""
    g = h.group
    classes = h.conjugacy_classes
    class_of = h.class_of
    r = len(classes)
    a = [[[0] * r for _ in range(r)] for _ in range(r)]
    for k, cls_k in enumerate(classes):
        z = cls_k[0]
        for i, cls_i in enumerate(classes):
            for x in cls_i:
                a[i][class_of[g.mul(g.inverse(x), z)]][k] += 1
    return a


def _split_eigenspaces(coeffs: List[List[List[int]]], p: int) -> List[List[int]]:
    """类乘法矩阵在 GF(p) 上的公共特征向量"""
    r = len(coeffs)
    spaces = [[[1 if i == j else 0 for i in range(r)] for j in range(r)]]
    for i in range(1, r):
        a_i = coeffs[i]
        refined = []
        for space in spaces:
            if len(space) == 1:
                refined.append(space)
                continue
            images = [[sum(a_i[j][k] * v[k] for k in range(r)) % p for j in range(r)] for v in space]
            for lam in range(p):
                rows = [[(images[c][row] - lam * space[c][row]) % p for c in range(len(space))] for row in range(r)]
                piece = _nullspace_mod_p(rows, len(space), p)
                if piece:
                    refined.append([
                        [sum(x[c] * space[c][row] for c in range(len(space))) % p for row in range(r)]
                        for x in piece
                    ])
        spaces = refined
    if any(len(space) != 1 for space in spaces) or len(spaces) != r:
        raise InvariantViolation("类乘法矩阵没有分裂为一维公共特征空间")
    return [space[0] for space in spaces]


@lru_cache(maxsize=None)
def character_table(h: Subgroup) -> CharacterTable:
    """
    子群 h 的不可约特征标表

    Returns:
        CharacterTable: 平凡特征标在前，其余按 (次数, 值) 排序
    """
    g = h.group
    e = g.exponent
    p, z = dixon_prime(g)
    classes = h.conjugacy_classes
    class_of = h.class_of
    r = len(classes)
    sizes = [len(c) for c in classes]
    inv_class = [class_of[g.inverse(c[0])] for c in classes]

    chars = []
    for v in _split_eigenspaces(_class_coefficients(h), p):
        if v[0] == 0:
            raise InvariantViolation("公共特征向量在单位元类上为零")
        scale = pow(v[0], -1, p)
        omega = [(x * scale) % p for x in v]
        s = sum(omega[i] * omega[inv_class[i]] * pow(sizes[i], -1, p) for i in range(r)) % p
        target = (h.order * pow(s, -1, p)) % p
        degree = next((d for d in range(1, isqrt(h.order) + 1) if d * d % p == target), None)
        if degree is None:
            raise InvariantViolation("无法从 mod p 数据恢复特征标次数")
        chi_p = [(omega[i] * degree * pow(sizes[i], -1, p)) % p for i in range(r)]

        values = []
        for cls in classes:
            x = cls[0]
            o = g.element_order(x)
            powers = [class_of[g.power(x, s)] for s in range(o)]
            value = [0] * e
            o_inv = pow(o, -1, p)
            for t in range(0, e, e // o):
                total = sum(chi_p[powers[s]] * pow(z, (-t * s) % e, p) for s in range(o)) % p
                value[t] = (total * o_inv) % p
            if sum(value) != degree:
                raise InvariantViolation(f"特征值重数之和 {sum(value)} 不等于次数 {degree}")
            values.append(tuple(value))
        chars.append((degree, tuple(values)))

    if sum(d * d for d, _ in chars) != h.order:
        raise InvariantViolation(f"Σ χ(1)² ≠ |H| = {h.order}")
    trivial = tuple(tuple(1 if t == 0 else 0 for t in range(e)) for _ in classes)
    chars.sort(key=lambda c: (c[1] != trivial, c[0], c[1]))
    return CharacterTable(h, e, classes, tuple(d for d, _ in chars), tuple(v for _, v in chars))


def _decompose(h: Subgroup, values: Callable[[int], Sequence[int]], denominator: int = 1) -> Tuple[int, ...]:
    """类函数（在每个类代表元上给出 Z[C_E] 值，整体除以 denominator）在 Irr(h) 上的重数"""
    table = character_table(h)
    e = table.exponent
    reps = [cls[0] for cls in table.classes]
    f = [values(x) for x in reps]
    out = []
    for chi in range(table.size):
        acc = [0] * e
        for idx, cls in enumerate(table.classes):
            _accumulate(acc, f[idx], table.values[chi][idx], len(cls))
        total = _reduce_to_integer(acc, e)
        if total % (h.order * denominator):
            raise InvariantViolation(f"重数 {total}/{h.order * denominator} 不是整数")
        out.append(total // (h.order * denominator))
    return tuple(out)


# ---- 表示环 ----

@dataclass(frozen=True)
class RepRingElement:
    """R(H) 中的元素：Irr(H)（按 character_table 的顺序）上的整数重数"""

    subgroup: Subgroup
    multiplicities: Tuple[int, ...]

    def __post_init__(self):
        if len(self.multiplicities) != character_table(self.subgroup).size:
            raise InvariantViolation("重数个数与不可约特征标个数不符")

    @classmethod
    def zero(cls, h: Subgroup) -> "RepRingElement":
        return cls(h, (0,) * character_table(h).size)

    @classmethod
    def irreducible(cls, h: Subgroup, index: int) -> "RepRingElement":
        size = character_table(h).size
        return cls(h, tuple(1 if i == index else 0 for i in range(size)))

    @classmethod
    def trivial(cls, h: Subgroup) -> "RepRingElement":
        return cls.irreducible(h, 0)

    @classmethod
    def regular(cls, h: Subgroup) -> "RepRingElement":
        return cls(h, character_table(h).degrees)

    def _check_same(self, other: "RepRingElement"):
        if self.subgroup != other.subgroup:
            raise InvariantViolation("两个表示环元素属于不同的群")

    def __add__(self, other: "RepRingElement") -> "RepRingElement":
        self._check_same(other)
        return RepRingElement(self.subgroup, tuple(a + b for a, b in zip(self.multiplicities, other.multiplicities)))

    def __sub__(self, other: "RepRingElement") -> "RepRingElement":
        self._check_same(other)
        return RepRingElement(self.subgroup, tuple(a - b for a, b in zip(self.multiplicities, other.multiplicities)))

    def scale(self, k: int) -> "RepRingElement":
        return RepRingElement(self.subgroup, tuple(k * a for a in self.multiplicities))

    def degree(self) -> int:
        return sum(a * d for a, d in zip(self.multiplicities, character_table(self.subgroup).degrees))

    def inner(self, other: "RepRingElement") -> int:
        self._check_same(other)
        return sum(a * b for a, b in zip(self.multiplicities, other.multiplicities))

    def is_zero(self) -> bool:
        return not any(self.multiplicities)

    def value(self, g: int) -> CyclotomicValue:
        table = character_table(self.subgroup)
        out = [0] * table.exponent
        for chi, a in enumerate(self.multiplicities):
            if a:
                for t, v in enumerate(table.value(chi, g)):
                    out[t] += a * v
        return tuple(out)

    def __str__(self) -> str:
        terms = [f"{a}·χ{i}" if a != 1 else f"χ{i}" for i, a in enumerate(self.multiplicities) if a]
        return " + ".join(terms) if terms else "0"

    def to_json(self) -> Dict:
        return {"order": self.subgroup.order, "multiplicities": list(self.multiplicities)}


@lru_cache(maxsize=None)
def restriction_matrix(g: Subgroup, h: Subgroup) -> Tuple[Tuple[int, ...], ...]:
    """第 χ 行：res χ 在 Irr(h) 上的重数"""
    table = character_table(g)
    return tuple(
        _decompose(h, lambda x, chi=chi: table.value(chi, x)) for chi in range(table.size)
    )


@lru_cache(maxsize=None)
def induction_matrix(h: Subgroup, g: Subgroup) -> Tuple[Tuple[int, ...], ...]:
    """第 ψ 行：ind ψ 在 Irr(g) 上的重数，按诱导公式直接计算（分母 |H| 最后再除）"""
    grp = h.group
    table = character_table(h)
    e = table.exponent
    rows = []
    for psi in range(table.size):
        def numerator(x: int, psi=psi) -> List[int]:
            acc = [0] * e
            for y in g.elements:
                conj = grp.mul(grp.mul(grp.inverse(y), x), y)
                if conj in h.elements:
                    for t, v in enumerate(table.value(psi, conj)):
                        acc[t] += v
            return acc
        rows.append(_decompose(g, numerator, denominator=h.order))
    return tuple(rows)


@lru_cache(maxsize=None)
def conjugation_matrix(h: Subgroup, gamma: int) -> Tuple[Tuple[int, ...], ...]:
    """c(γ)_*: R(h) → R(γhγ^{-1})，(γψ)(l) = ψ(γ^{-1} l γ)"""
    grp = h.group
    target = h.conjugate_by(gamma)
    table = character_table(h)
    g_inv = grp.inverse(gamma)
    return tuple(
        _decompose(target, lambda l, psi=psi: table.value(psi, grp.conjugate_element(g_inv, l)))
        for psi in range(table.size)
    )


def _apply(x: RepRingElement, matrix: Tuple[Tuple[int, ...], ...], target: Subgroup) -> RepRingElement:
    size = character_table(target).size
    out = [0] * size
    for a, row in zip(x.multiplicities, matrix):
        if a:
            for j in range(size):
                out[j] += a * row[j]
    return RepRingElement(target, tuple(out))


def restrict(x: RepRingElement, h: Subgroup) -> RepRingElement:
    """res_G^H"""
    if not h.is_subgroup_of(x.subgroup):
        raise NotASubgroup("限制的目标不是子群")
    return _apply(x, restriction_matrix(x.subgroup, h), h)


def induce(x: RepRingElement, g: Subgroup) -> RepRingElement:
    """ind_H^G"""
    if not x.subgroup.is_subgroup_of(g):
        raise NotASubgroup("诱导的源不是子群")
    return _apply(x, induction_matrix(x.subgroup, g), g)


def conjugate(x: RepRingElement, gamma: int) -> RepRingElement:
    """沿 c(γ): K' → γK'γ^{-1} 的诱导"""
    return _apply(x, conjugation_matrix(x.subgroup, gamma), x.subgroup.conjugate_by(gamma))


# ---- 检查 ----

def frobenius_check(g: Subgroup, h: Subgroup) -> bool:
    """⟨ind ψ, χ⟩_G = ⟨ψ, res χ⟩_H 对全部不可约特征标成立"""
    ind = induction_matrix(h, g)
    res = restriction_matrix(g, h)
    return all(ind[psi][chi] == res[chi][psi] for psi in range(len(ind)) for chi in range(len(res)))


def double_coset_check(group: FiniteGroup, h: Subgroup, k: Subgroup) -> bool:
    """
    双陪集公式 res_G^H ∘ ind_K^G = Σ_{HγK} ind ∘ c(γ)_* ∘ res_K^{K ∩ γ^{-1}Hγ}

    Args:
        group: 有限群 G
        h, k: 子群

    Returns:
        bool: 在 K 的每个不可约特征标上两边相等
    """
    whole = group.whole()
    cosets = group.double_cosets(h, k)
    for psi in range(character_table(k).size):
        x = RepRingElement.irreducible(k, psi)
        lhs = restrict(induce(x, whole), h)
        rhs = RepRingElement.zero(h)
        for gamma, _ in cosets:
            k_gamma = k.intersection(h.conjugate_by(group.inverse(gamma)))
            rhs = rhs + induce(conjugate(restrict(x, k_gamma), gamma), h)
        if lhs != rhs:
            logger.warning(f"❌ {group.name}: 双陪集公式在 χ{psi} 上不成立: {lhs} ≠ {rhs}")
            return False
    return True


def double_coset_report(group: FiniteGroup) -> List[Dict]:
    """对 G 的全部子群对 (H, K) 检查双陪集公式"""
    subs = group.subgroups()
    results = []
    for i, h in enumerate(subs):
        for j, k in enumerate(subs):
            ok = double_coset_check(group, h, k)
            results.append({
                "H": i,
                "K": j,
                "H_order": h.order,
                "K_order": k.order,
                "double_cosets": len(group.double_cosets(h, k)),
                "passed": ok,
            })
    passed = all(r["passed"] for r in results)
    AuditLogger.log_check_event("double_coset", group.name, passed, {"pairs": len(results)})
    logger.info(f"{'✅' if passed else '❌'} {group.name}: {len(results)} 个子群对")
    return results


# ---- 范数映射 ----

def validate_action(group: FiniteGroup, action: Sequence[IntMatrix]) -> int:
    """检查 action[g] 给出 G 在 ℤ^r 上的表示，返回 r"""
    if len(action) != group.order:
        raise NotARepresentation(f"需要 {group.order} 个作用矩阵，得到 {len(action)}")
    r = action[0].rows
    for m in action:
        if not m.is_square or m.rows != r:
            raise NotARepresentation("作用矩阵必须是同阶方阵")
    if not action[0].is_identity():
        raise NotARepresentation("单位元没有作用为恒等")
    for a in range(group.order):
        for b in range(group.order):
            if action[a] @ action[b] != action[group.mul(a, b)]:
                raise NotARepresentation(f"ρ({a})ρ({b}) ≠ ρ({a}·{b})")
    return r


def action_from_generators(group: FiniteGroup, generators: Dict[int, IntMatrix]) -> List[IntMatrix]:
    """由生成元上的矩阵扩展到全部元素（并校验）"""
    if not generators:
        raise NotARepresentation("至少需要一个生成元")
    r = next(iter(generators.values())).rows
    images: Dict[int, IntMatrix] = {0: IntMatrix.identity(r)}
    frontier = [0]
    while frontier:
        nxt = []
        for x in frontier:
            for g, m in generators.items():
                y = group.mul(x, g)
                value = images[x] @ m
                if y in images:
                    if images[y] != value:
                        raise NotARepresentation(f"生成元上的矩阵与关系不相容（元素 {y}）")
                    continue
                images[y] = value
                nxt.append(y)
        frontier = nxt
    if len(images) != group.order:
        raise NotARepresentation("给定的元素不生成整个群")
    action = [images[g] for g in range(group.order)]
    validate_action(group, action)
    return action


@dataclass(frozen=True)
class NormMapResult:
    invariants: Lattice
    augmentation: Lattice
    kernel: AbelianGroupPresentation
    cokernel: AbelianGroupPresentation
    kernel_ok: bool
    cokernel_ok: bool

    def to_json(self) -> Dict:
        return {
            "invariants_rank": self.invariants.rank,
            "kernel": self.kernel.describe(),
            "cokernel": self.cokernel.describe(),
            "kernel_ok": self.kernel_ok,
            "cokernel_ok": self.cokernel_ok,
        }


def norm_map_groups(group: FiniteGroup, action: Sequence[IntMatrix]) -> NormMapResult:
    """
    范数映射 N_F: ℤ ⊗_{ℤF} M → M^F 的核与余核

    Args:
        group: 有限群 F
        action: action[g] 为 g 在 ℤ^r 上的矩阵

    Returns:
        NormMapResult
    """
    r = validate_action(group, action)
    ident = IntMatrix.identity(r)
    diffs = [m - ident for m in action]

    stacked = diffs[0]
    for d in diffs[1:]:
        stacked = stacked.vstack(d)
    invariants = Lattice.span(kernel_basis(stacked)) if r else Lattice.full(0)

    gens = diffs[0]
    for d in diffs[1:]:
        gens = gens.hstack(d)
    augmentation = Lattice.span(gens)

    norm = IntMatrix.zeros(r, r)
    for m in action:
        norm = norm + m
    norm_kernel = Lattice.span(kernel_basis(norm)) if r else Lattice.full(0)
    image = Lattice.span(norm)

    ker = quotient_group(norm_kernel, augmentation)
    coker = quotient_group(invariants, image)
    n = group.order
    return NormMapResult(invariants, augmentation, ker, coker, ker.is_annihilated_by(n), coker.is_annihilated_by(n))


def norm_annihilation_check(group: FiniteGroup, action: Sequence[IntMatrix]) -> Tuple[bool, bool]:
    """|F|·ker = 0 与 |F|·coker = 0"""
    result = norm_map_groups(group, action)
    AuditLogger.log_check_event(
        "norm_annihilation", group.name, result.kernel_ok and result.cokernel_ok, result.to_json()
    )
    return result.kernel_ok, result.cokernel_ok


def permutation_action(group: FiniteGroup, h: Optional[Subgroup] = None) -> List[IntMatrix]:
    """G 在 G/H 的左陪集上的置换表示（H 缺省为平凡子群，即正则表示）"""
    h = h or group.trivial_subgroup()
    cosets = group.left_cosets(h)
    which = {x: idx for idx, (_, coset) in enumerate(cosets) for x in coset}
    size = len(cosets)
    action = []
    for g in range(group.order):
        cols = []
        for rep, _ in cosets:
            col = [0] * size
            col[which[group.mul(g, rep)]] = 1
            cols.append(col)
        action.append(IntMatrix.from_columns(cols, size))
    return action


def normal_subgroup_check(group: FiniteGroup, h: Subgroup) -> Dict[str, bool]:
    """
    H ⊴ G 时关于 ind/res 与 G/H-作用的各项断言

    Returns:
        各项检查的结果
    """
    if not group.is_normal(h):
        raise NotASubgroup(f"{group.name}: 子群不是正规子群")
    whole = group.whole()
    table_h = character_table(h)
    table_g = character_table(whole)
    quotient, reps = group.quotient(h)

    ind_invariant = all(
        induce(conjugate(RepRingElement.irreducible(h, psi), gamma), whole)
        == induce(RepRingElement.irreducible(h, psi), whole)
        for psi in range(table_h.size) for gamma in range(group.order)
    )
    res_invariant = all(
        conjugate(restrict(RepRingElement.irreducible(whole, chi), h), gamma)
        == restrict(RepRingElement.irreducible(whole, chi), h)
        for chi in range(table_g.size) for gamma in range(group.order)
    )
    res_ind_is_norm = True
    for psi in range(table_h.size):
        x = RepRingElement.irreducible(h, psi)
        total = RepRingElement.zero(h)
        for gamma in reps:
            total = total + conjugate(x, gamma)
        if restrict(induce(x, whole), h) != total:
            res_ind_is_norm = False
    inner_identity = all(
        conjugate(RepRingElement.irreducible(whole, chi), gamma) == RepRingElement.irreducible(whole, chi)
        for chi in range(table_g.size) for gamma in range(group.order)
    )

    # G/H 通过共轭置换 Irr(H)
    action = []
    for gamma in reps:
        cols = [list(conjugation_matrix(h, gamma)[psi]) for psi in range(table_h.size)]
        action.append(IntMatrix.from_columns(cols, table_h.size))
    kernel_ok, cokernel_ok = norm_annihilation_check(quotient, action)

    result = {
        "ind_invariant": ind_invariant,
        "res_invariant": res_invariant,
        "res_ind_is_norm": res_ind_is_norm,
        "inner_conjugation_identity": inner_identity,
        "norm_kernel_annihilated": kernel_ok,
        "norm_cokernel_annihilated": cokernel_ok,
    }
    AuditLogger.log_check_event("normal_subgroup", group.name, all(result.values()), result)
    return result
