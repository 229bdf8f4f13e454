"""报告的组装与渲染：确定性的 JSON 与 Jinja2 文本摘要。"""
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from jinja2 import Environment, FileSystemLoader

from config.settings import BASE_DIR
from eta_engine import (
    all_invariant_ranks,
    delta,
    eta_matrix,
    fin_cycle_census_check,
    inf_ranks,
    molien_alternating_check,
    rank_k_inf,
    verify_eta_shape,
)
from ind_res import catalog_group, double_coset_report, frobenius_check, normal_subgroup_check
from limit_tower import (
    TelescopeSystem,
    finite_adelic_k,
    full_k_theory,
    group_algebra_k,
    stable_rank_oracle,
    telescope_colimit,
)
from number_field import MuVerdict, Order, field_summary, smallest_admissible, verify_mu_maximality
from semidirect_group import enumerate_maximal_classes
from utils.audit_logger import AuditLogger
from utils.errors import InvariantViolation, SpecFormatError

logger = logging.getLogger(__name__)

TARGETS = ("ring-cstar", "group-cstar", "finite-adelic")

_env = Environment(
    loader=FileSystemLoader(os.path.join(BASE_DIR, "templates")),
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


@dataclass
class Report:
    command: str
    title: str
    field_info: Dict[str, Any] = field(default_factory=dict)
    sections: Dict[str, Any] = field(default_factory=dict)
    checks: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_json(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "title": self.title,
            "field": self.field_info,
            "sections": self.sections,
            "checks": self.checks,
            "passed": self.passed,
        }


def dumps(report: Report) -> str:
    """确定性 JSON：键顺序由构造顺序固定"""
    return json.dumps(report.to_json(), ensure_ascii=False, indent=2)


def _text_value(value: Any) -> str:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return str(value)
    if isinstance(value, dict) and "text" in value:
        return str(value["text"])
    return json.dumps(value, ensure_ascii=False)


def render_text(report: Report) -> str:
    """templates/report.txt.j2 渲染的人类可读摘要"""
    template = _env.get_template("report.txt.j2")
    return template.render(
        title=report.title,
        field=report.field_info,
        sections=[(name, _text_value(value)) for name, value in report.sections.items()],
        checks=list(report.checks.items()),
        passed=report.passed,
    )


def _mu_check(o: Order) -> bool:
    return verify_mu_maximality(o) != MuVerdict.FAILED


def _invariant_sections(o: Order) -> Dict[str, Any]:
    classes = enumerate_maximal_classes(o)
    return {
        "maximal_classes": [str(l) for l in classes],
        "maximal_class_count": len(classes),
        "invariant_ranks": list(all_invariant_ranks(o)),
        "inf_ranks": inf_ranks(o),
        "delta": delta(o),
        "rank_k_inf": rank_k_inf(o),
    }


def build_analyze_report(o: Order) -> Report:
    molien_ok, lhs, rhs = molien_alternating_check(o)
    report = Report(
        command="analyze",
        title=f"数域不变量: {o.name}",
        field_info=field_summary(o),
        sections=_invariant_sections(o),
        checks={"molien_alternating": molien_ok, "mu_maximality": _mu_check(o)},
    )
    report.sections["molien"] = {"alternating_sum": str(lhs), "average_det": str(rhs)}
    AuditLogger.log_field_event("analyzed", o.name, {"passed": report.passed})
    return report


def build_eta_report(o: Order, c: Optional[int] = None) -> Report:
    c = c if c is not None else smallest_admissible(o)
    eta = eta_matrix(o, c)
    shape_ok = True
    try:
        verify_eta_shape(eta)
    except InvariantViolation:
        shape_ok = False
    return Report(
        command="eta",
        title=f"η_{c}: {o.name}",
        field_info={"name": o.name, "n": o.n, "m": o.m},
        sections={"eta": eta.to_json()},
        checks={"eta_shape": shape_ok, "fin_cycle_census": fin_cycle_census_check(o, c)},
    )


def build_ktheory_report(o: Order, c: Optional[int] = None, depth: int = 0, target: str = "ring-cstar") -> Report:
    """
    完整的 K 理论报告

    Args:
        o: 整数环
        c: 可容许模数，缺省为最小可容许值
        depth: Γ 的截断深度
        target: ring-cstar / group-cstar / finite-adelic

    Returns:
        Report
    """
    if target not in TARGETS:
        raise SpecFormatError(f"未知的目标 {target}（可选: {', '.join(TARGETS)}）")
    c = c if c is not None else smallest_admissible(o)
    summary = field_summary(o)
    summary["c"] = c
    molien_ok, _, _ = molien_alternating_check(o)
    checks = {"molien_alternating": molien_ok, "mu_maximality": _mu_check(o)}

    if target == "group-cstar":
        sections = group_algebra_k(o, depth)
    elif target == "finite-adelic":
        sections = {label: k.to_json() for label, k in finite_adelic_k(o, c).items()}
    else:
        result = full_k_theory(o, c, depth)
        sections = {**_invariant_sections(o), **result.to_json()}
        checks["fin_cycle_census"] = fin_cycle_census_check(o, c)
        checks["formula_paths_agree"] = len({b.truncated for b in result.branches}) == 1

    report = Report(
        command="ktheory",
        title=f"K 理论: {o.name}（{target}）",
        field_info=summary,
        sections=sections,
        checks=checks,
    )
    AuditLogger.log_limit_event("report_built", o.name, {"c": c, "depth": depth, "target": target, "passed": report.passed})
    return report


def build_limit_report(system: TelescopeSystem, rational: bool = False) -> Report:
    colimit = telescope_colimit(system, invert_all_primes=not rational)
    sections: Dict[str, Any] = {
        "c": system.c,
        "size": system.matrix.rows,
        "certified": system.certificate is not None,
        "colimit": colimit.to_json(),
    }
    checks: Dict[str, bool] = {}
    if system.certificate is not None:
        q, z = stable_rank_oracle(system)
        sections["oracle"] = {"q_rank": q, "z_rank": z}
        checks["oracle_agrees"] = rational or (q, z) == (colimit.even.q_rank, colimit.even.z_rank)
    return Report(command="limit", title="归纳极限", sections=sections, checks=checks)


def build_doublecoset_report(name: str) -> Report:
    group = catalog_group(name)
    pairs = double_coset_report(group)
    subs = group.subgroups()
    whole = group.whole()
    frobenius = all(frobenius_check(whole, h) for h in subs)
    normal: List[Dict[str, Any]] = []
    normal_ok = True
    for idx, h in enumerate(subs):
        if group.is_normal(h):
            result = normal_subgroup_check(group, h)
            normal_ok = normal_ok and all(result.values())
            normal.append({"H": idx, "order": h.order, **result})
    return Report(
        command="check-doublecoset",
        title=f"双陪集公式: {name}（阶 {group.order}）",
        field_info={"group": name, "order": group.order, "subgroups": len(subs)},
        sections={"pairs": pairs, "normal_subgroups": normal},
        checks={
            "double_coset": all(p["passed"] for p in pairs),
            "frobenius": frobenius,
            "normal_subgroups": normal_ok,
        },
    )
