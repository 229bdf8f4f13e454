"""半直积 R⋊μ：元素运算、有限（循环）子群的共轭分类与特征标展开。

乘法 (b, ζ^i)(d, ζ^j) = (b + ζ^i d, ζ^{i+j})。共轭公式
(d, ζ^k)(b, ζ^i)(d, ζ^k)^{-1} = (ζ^k b + (1 - ζ^i) d, ζ^i)，
因此 ⟨(b, ζ^i)⟩ 的共轭类由 b 在 R/(1-ζ^i)R 中的 ζ-轨道决定。
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from math import gcd
from typing import Dict, List, Optional, Tuple

from k0_classes import K0Label, K0Vector
from number_field import Coords, IdealQuotient, Order, OrderElement
from utils.errors import ComputationError, InfiniteOrderGenerator, InvariantViolation

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SemidirectElement:
    b: OrderElement
    i: int

    def to_json(self) -> Dict:
        return {"b": self.b.to_json(), "i": self.i}


@dataclass(frozen=True)
class FiniteSubgroupLabel:
    """有限子群 ⟨(b, ζ^i)⟩ 的共轭类：i | m，b 为轨道规范代表的提升"""

    i: int
    b: Coords

    def sort_key(self) -> Tuple:
        return (self.i, self.b)

    def is_mu(self) -> bool:
        return self.i == 1 and not any(self.b)

    def order(self, m: int) -> int:
        return m // self.i

    def generator(self) -> SemidirectElement:
        return SemidirectElement(OrderElement(self.b), self.i)

    def __str__(self) -> str:
        if self.is_mu():
            return "(μ)"
        return f"(i={self.i},b=[{','.join(str(x) for x in self.b)}])"

    def to_json(self) -> Dict:
        return {"i": self.i, "b_coords": [str(x) for x in self.b]}


# ---- 元素运算 ----

def identity(o: Order) -> SemidirectElement:
    return SemidirectElement(o.zero(), 0)


def multiply(o: Order, g: SemidirectElement, h: SemidirectElement) -> SemidirectElement:
    return SemidirectElement(g.b + o.rotate(h.b, g.i), (g.i + h.i) % o.m)


def inverse(o: Order, g: SemidirectElement) -> SemidirectElement:
    return SemidirectElement(-o.rotate(g.b, -g.i), (-g.i) % o.m)


def power(o: Order, g: SemidirectElement, k: int) -> SemidirectElement:
    """g^k = ((1 + ζ^i + … + ζ^{i(k-1)}) b, ζ^{ik})"""
    if k < 0:
        return power(o, inverse(o, g), -k)
    result = identity(o)
    base = g
    while k:
        if k & 1:
            result = multiply(o, result, base)
        base = multiply(o, base, base)
        k >>= 1
    return result


def conjugate(o: Order, d: SemidirectElement, g: SemidirectElement) -> SemidirectElement:
    """d g d^{-1}"""
    return multiply(o, multiply(o, d, g), inverse(o, d))


def order(o: Order, g: SemidirectElement) -> Optional[int]:
    """元素的阶；纯平移 (b, 1), b ≠ 0 的阶无限，返回 None"""
    if g.i % o.m == 0:
        return 1 if g.b.is_zero() else None
    q = o.m // gcd(g.i, o.m)
    if power(o, g, q) != identity(o):
        raise InvariantViolation("有限阶元素的几何和在整周期处不为零")
    return q


# ---- 共轭分类 ----

@lru_cache(maxsize=None)
def rotation_quotient(o: Order, r: int) -> IdealQuotient:
    """R/(1 - ζ^r)R"""
    return IdealQuotient(o, o.one() - o.rotate(o.one(), r))


def _least_orbit_key(o: Order, quot: IdealQuotient, b: OrderElement) -> Tuple[int, ...]:
    best = None
    x = b
    for _ in range(o.m):
        key = quot.reduce(x)
        if best is None or key < best:
            best = key
        x = o.rotate(x, 1)
    return best


def _normalize_rotation(o: Order, b: OrderElement, i: int) -> Tuple[OrderElement, int]:
    """把 ⟨(b, ζ^i)⟩ 的生成元换成旋转部分为 ζ^{gcd(i, m)} 的那个"""
    i %= o.m
    if i == 0:
        if b.is_zero():
            raise ComputationError("平凡子群没有共轭类标签")
        raise InfiniteOrderGenerator("纯平移生成无限循环群")
    g = gcd(i, o.m)
    q = o.m // g
    k = next(k for k in range(1, q + 1) if (i * k) % o.m == g)
    gen = power(o, SemidirectElement(b, i), k)
    return gen.b, g


def conjugacy_label(o: Order, b: OrderElement, i: int) -> FiniteSubgroupLabel:
    """
    有限子群 ⟨(b, ζ^i)⟩ 的规范共轭类标签

    Args:
        o: 整数环
        b: 平移部分
        i: 旋转指数，要求 ζ^i ≠ 1

    Returns:
        FiniteSubgroupLabel: 旋转指数规范为 gcd(i, m)，平移为 ζ-轨道中字典序最小的类的提升
    """
    b_norm, g = _normalize_rotation(o, b, i)
    quot = rotation_quotient(o, g)
    key = _least_orbit_key(o, quot, b_norm)
    return FiniteSubgroupLabel(g, quot.lift(key).coords)


def element_class_key(o: Order, g: SemidirectElement) -> Tuple[int, Tuple[int, ...]]:
    """有限阶元素 (b, ζ^r) 的共轭类不变量"""
    r = g.i % o.m
    if r == 0:
        raise ComputationError("单位元或纯平移没有元素类不变量")
    return r, _least_orbit_key(o, rotation_quotient(o, r), g.b)


def _proper_divisors_below(i: int, m: int) -> List[int]:
    return [d for d in range(1, i) if i % d == 0 and m % d == 0]


def is_maximal(o: Order, l: FiniteSubgroupLabel) -> bool:
    """⟨(b, ζ^i)⟩ 不真包含于任何更大的有限子群（在共轭意义下）"""
    for i2 in _proper_divisors_below(l.i, o.m):
        quot = rotation_quotient(o, i2)
        for b2 in quot.elements():
            sub = power(o, SemidirectElement(b2, i2), l.i // i2)
            if conjugacy_label(o, sub.b, sub.i) == l:
                return False
    return True


@lru_cache(maxsize=None)
def _maximal_classes_cached(o: Order) -> Tuple[FiniteSubgroupLabel, ...]:
    labels = set()
    for i in range(1, o.m):
        if o.m % i != 0:
            continue
        quot = rotation_quotient(o, i)
        for b in quot.elements():
            labels.add(conjugacy_label(o, b, i))
    maximal = [l for l in labels if is_maximal(o, l)]
    maximal.sort(key=lambda l: (not l.is_mu(), l.sort_key()))
    if not maximal or not maximal[0].is_mu():
        raise InvariantViolation(f"{o.name}: (μ) 不在极大有限子群列表中")
    logger.info(f"✅ {o.name}: 共 {len(maximal)} 个极大有限子群类")
    return tuple(maximal)


def enumerate_maximal_classes(o: Order) -> List[FiniteSubgroupLabel]:
    """极大有限子群共轭类的完整列表 𝓜，(μ) 在最前"""
    return list(_maximal_classes_cached(o))


def mu_label(o: Order) -> FiniteSubgroupLabel:
    return FiniteSubgroupLabel(1, o.zero().coords)


@lru_cache(maxsize=None)
def embed_in_maximal(o: Order, b: Coords, r: int) -> Tuple[FiniteSubgroupLabel, int]:
    """
    找到极大类 l 与指数 k，使 (b, ζ^r) 共轭于 l 的生成元的 k 次幂

    Returns:
        (l, k)，k 在模 |M| 意义下唯一
    """
    target = element_class_key(o, SemidirectElement(OrderElement(b), r))
    for l in enumerate_maximal_classes(o):
        if (r % o.m) % l.i != 0:
            continue
        k = (r % o.m) // l.i
        candidate = power(o, l.generator(), k)
        if element_class_key(o, candidate) == target:
            return l, k
    raise InvariantViolation(f"{o.name}: 元素 ({b}, ζ^{r}) 不属于任何极大有限子群")


def character_class(l: FiniteSubgroupLabel, s: int) -> K0Label:
    """非平凡特征标 s 在极大类 l 上对应的基标签"""
    return K0Label.mu(s) if l.is_mu() else K0Label.fin(l, s)


def expand_character(o: Order, l: FiniteSubgroupLabel, k: int, t: int) -> K0Vector:
    """
    M' = ⟨g^k⟩ ⊆ M = ⟨g⟩（g 为 l 的生成元）上特征标 χ̃_t 的谱投影类，
    展开为 M 上所有限制为 χ̃_t 的特征标之和；平凡特征标经 [1] - Σ 非平凡 改写。
    """
    q = l.order(o.m)
    e = gcd(k, q)
    sub_order = q // e
    t %= sub_order
    if sub_order == 1:
        s_values = list(range(q))
    else:
        s0 = (t * pow((k // e) % sub_order, -1, sub_order)) % sub_order
        s_values = [s0 + sub_order * r for r in range(e)]

    coeffs: Dict[K0Label, int] = {}
    for s in s_values:
        if s % q == 0:
            coeffs[K0Label.unit()] = coeffs.get(K0Label.unit(), 0) + 1
            for s2 in range(1, q):
                lab = character_class(l, s2)
                coeffs[lab] = coeffs.get(lab, 0) - 1
        else:
            lab = character_class(l, s % q)
            coeffs[lab] = coeffs.get(lab, 0) + 1
    return K0Vector.from_dict(coeffs)


def spectral_class(o: Order, b: OrderElement, r: int, t: int) -> K0Vector:
    """[p_{χ_t}((b, ζ^r))] 在极大类基下的展开；t 为相对于该元素本身的特征标下标"""
    if r % o.m == 0:
        if not b.is_zero():
            raise InfiniteOrderGenerator("纯平移没有谱投影")
        return K0Vector.of(K0Label.unit())
    l, k = embed_in_maximal(o, b.coords, r % o.m)
    return expand_character(o, l, k, t)


def brute_force_maximal_classes(o: Order) -> List[FiniteSubgroupLabel]:
    """不经规范化、直接枚举全部候选生成元的对照实现（仅适用于小商环）"""
    elements = []
    for i in range(1, o.m):
        if o.m % i:
            continue
        for b in rotation_quotient(o, i).elements():
            elements.append(SemidirectElement(b, i))

    def subgroup_keys(g: SemidirectElement) -> set:
        q = order(o, g)
        return {element_class_key(o, power(o, g, j)) for j in range(1, q)}

    classes: Dict[Tuple, SemidirectElement] = {}
    for g in elements:
        classes.setdefault(element_class_key(o, g), g)
    gens = list(classes.values())
    maximal = []
    for g in gens:
        key = element_class_key(o, g)
        contained = any(
            order(o, h) > order(o, g) and key in subgroup_keys(h) for h in gens
        )
        if not contained:
            maximal.append(conjugacy_label(o, g.b, g.i))
    unique = sorted(set(maximal), key=lambda l: (not l.is_mu(), l.sort_key()))
    return unique
