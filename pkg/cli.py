"""命令行入口：run(argv) 返回退出码。

退出码：0 成功；2 规格校验失败；1 内部不变量失败、计算错误或检查未通过。
"""
import argparse
import json
import logging
import sys
from dataclasses import replace
from typing import List, Optional

from config.settings import settings
from exact_linalg import IntMatrix
from limit_tower import TelescopeSystem
from number_field import open_field
from report import (
    TARGETS,
    Report,
    build_analyze_report,
    build_doublecoset_report,
    build_eta_report,
    build_ktheory_report,
    build_limit_report,
    dumps,
    render_text,
)
from selftest import acceptance_checks, run_selftest
from utils.audit_logger import AuditLogger
from utils.errors import ComputationError, InvariantViolation, SpecFormatError, SpecValidationError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ktheory", description="数域整数环的环 C*-代数 K 理论计算器")
    parser.add_argument("--json", action="store_true", help="输出确定性的 JSON")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="日志级别 (默认: KT_LOG_LEVEL)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="数域不变量")
    p.add_argument("spec", help="规格文件路径或内置名 (例如: gaussian, sqrt2.toml)")

    p = sub.add_parser("eta", help="计算 η_c")
    p.add_argument("spec")
    p.add_argument("--c", type=int, help="可容许模数 (默认: 最小可容许值)")

    p = sub.add_parser("ktheory", help="完整 K 理论报告")
    p.add_argument("spec")
    p.add_argument("--c", type=int, help="可容许模数 (默认: 最小可容许值)")
    p.add_argument("--truncate", type=int, default=0, help="Γ 的截断深度 j")
    p.add_argument("--target", choices=TARGETS, default="ring-cstar")

    p = sub.add_parser("limit", help="用户矩阵的归纳极限")
    p.add_argument("file", help='JSON: {"c": int, "matrix": [[...]], "diagonal_exponents": [...]}')
    p.add_argument("--rational", action="store_true", help="只求有理化的极限")

    p = sub.add_parser("check-doublecoset", help="在目录中的有限群上检查双陪集公式")
    p.add_argument("--group", required=True, help="群名 (例如: S3, D4, A4, Q8)")

    p = sub.add_parser("selftest", help="运行全部验收检查")
    p.add_argument("--max-points", type=int, default=settings.SELFTEST_MAX_POINTS, help="c^n 的上界")
    p.add_argument("--only", nargs="*", choices=[name for name, _ in acceptance_checks()], help="只运行指定的检查")
    return parser


def load_limit_system(path: str) -> TelescopeSystem:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SpecFormatError(f"无法读取 {path}: {exc}") from exc
    if not isinstance(data, dict) or "c" not in data or "matrix" not in data:
        raise SpecFormatError('归纳极限输入需要 "c" 与 "matrix" 两个键')
    try:
        matrix = IntMatrix.from_json(data["matrix"])
        c = int(data["c"])
        exps = data.get("diagonal_exponents")
        certificate = None if exps is None else tuple(None if e is None else int(e) for e in exps)
    except (TypeError, ValueError) as exc:
        raise SpecFormatError(f"归纳极限输入格式错误: {exc}") from exc
    if certificate is None:
        return TelescopeSystem.with_inferred_certificate(matrix, c)
    return TelescopeSystem(matrix, c, certificate)


def _emit(report: Report, as_json: bool):
    if as_json:
        print(dumps(report))
    else:
        print(render_text(report), end="")


def _dispatch(args) -> int:
    if args.command == "selftest":
        results = run_selftest(args.max_points, args.only)
        if args.json:
            print(json.dumps([r.to_json() for r in results], ensure_ascii=False, indent=2))
        else:
            for r in results:
                print(r.line())
        return 0 if all(r.passed for r in results) else 1

    if args.command == "analyze":
        report = build_analyze_report(open_field(args.spec))
    elif args.command == "eta":
        report = build_eta_report(open_field(args.spec), args.c)
    elif args.command == "ktheory":
        report = build_ktheory_report(open_field(args.spec), args.c, args.truncate, args.target)
    elif args.command == "limit":
        report = build_limit_report(load_limit_system(args.file), args.rational)
    else:
        report = build_doublecoset_report(args.group)
        if not args.json:
            for pair in report.sections["pairs"]:
                mark = "✅" if pair["passed"] else "❌"
                print(f"{mark} H#{pair['H']} (|H|={pair['H_order']}), K#{pair['K']} (|K|={pair['K_order']}): "
                      f"{pair['double_cosets']} 个双陪集")
            failed = sum(1 for pair in report.sections["pairs"] if not pair["passed"])
            summary = f"{len(report.sections['pairs'])} 对子群，{failed} 对未通过"
            report = replace(report, sections={**report.sections, "pairs": summary})
    _emit(report, args.json)
    return 0 if report.passed else 1


def run(argv: Optional[List[str]] = None) -> int:
    """
    解析参数并执行子命令

    Args:
        argv: 参数列表（缺省为 sys.argv[1:]）

    Returns:
        int: 退出码
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
        stream=sys.stderr,
    )
    settings.log()
    try:
        return _dispatch(args)
    except SpecValidationError as exc:
        logger.error(f"❌ 规格校验失败: {exc}")
        AuditLogger.log_error("spec_validation", args.command, exc)
        return 2
    except InvariantViolation as exc:
        logger.error(f"❌ 内部不变量失败: {exc}")
        AuditLogger.log_error("invariant_violation", args.command, exc)
        return 1
    except ComputationError as exc:
        logger.error(f"❌ 计算失败: {exc}")
        AuditLogger.log_error("computation_error", args.command, exc)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
