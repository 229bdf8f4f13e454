import logging
from typing import Any, Callable, Dict, Optional

import uvicorn
from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import PlainTextResponse
from prometheus_client import CONTENT_TYPE_LATEST, Counter, generate_latest

from config.settings import settings
from ind_res import catalog_names
from number_field import bundled_spec_names, open_field
from report import (
    TARGETS,
    build_analyze_report,
    build_doublecoset_report,
    build_eta_report,
    build_ktheory_report,
    render_text,
)
from utils.audit_logger import AuditLogger
from utils.errors import ComputationError, InvariantViolation, SpecValidationError

logger = logging.getLogger(__name__)

# 打印配置状态
logger.info("🚀 FastAPI 启动中，打印配置状态：")
settings.log()

# 创建FastAPI应用
app = FastAPI(
    title="环 C*-代数 K 理论计算服务",
    description="数域整数环的环 C*-代数 K 理论的精确符号计算",
    version="1.0.0"
)

REQUESTS = Counter("ktheory_requests_total", "按端点统计的请求数", ["endpoint"])
FAILURES = Counter("ktheory_failures_total", "按端点与错误类型统计的失败数", ["endpoint", "kind"])


def _guard(endpoint: str, subject: str, compute: Callable[[], Any]) -> Any:
    """统一的错误映射：规格错误 422，计算前置条件 400，内部不变量 500"""
    REQUESTS.labels(endpoint).inc()
    try:
        return compute()
    except SpecValidationError as e:
        FAILURES.labels(endpoint, "spec").inc()
        logger.error(f"❌ {endpoint}: 规格校验失败: {e}")
        raise HTTPException(status_code=422, detail=str(e))
    except InvariantViolation as e:
        FAILURES.labels(endpoint, "invariant").inc()
        logger.error(f"❌ {endpoint}: 内部不变量失败: {e}")
        AuditLogger.log_error("invariant_violation", subject, e, {"endpoint": endpoint})
        raise HTTPException(status_code=500, detail=str(e))
    except ComputationError as e:
        FAILURES.labels(endpoint, "computation").inc()
        logger.error(f"❌ {endpoint}: 计算失败: {e}")
        raise HTTPException(status_code=400, detail=str(e))


def _known_field(name: str):
    if name not in bundled_spec_names():
        raise HTTPException(status_code=404, detail=f"未知的数域: {name}")


# 健康检查端点
@app.get("/health")
def health_check():
    return {"status": "ok"}


@app.get("/fields")
def list_fields() -> Dict[str, Any]:
    return {"fields": bundled_spec_names(), "groups": catalog_names()}


@app.get("/fields/{name}/analyze")
def analyze_field(name: str):
    _known_field(name)
    return _guard("analyze", name, lambda: build_analyze_report(open_field(name)).to_json())


@app.get("/fields/{name}/eta")
def eta_for_field(name: str, c: Optional[int] = None):
    _known_field(name)
    return _guard("eta", name, lambda: build_eta_report(open_field(name), c).to_json())


@app.get("/fields/{name}/ktheory")
def ktheory_for_field(
    name: str,
    c: Optional[int] = None,
    truncate: int = Query(0, ge=0, le=16),
    target: str = "ring-cstar",
    format: str = "json",
):
    _known_field(name)
    if target not in TARGETS:
        raise HTTPException(status_code=422, detail=f"未知的目标: {target}")
    report = _guard("ktheory", name, lambda: build_ktheory_report(open_field(name), c, truncate, target))
    if format == "text":
        return PlainTextResponse(render_text(report))
    return report.to_json()


@app.get("/groups/{name}/double-coset")
def double_coset_for_group(name: str):
    if name not in catalog_names():
        raise HTTPException(status_code=404, detail=f"未知的群: {name}")
    return _guard("double_coset", name, lambda: build_doublecoset_report(name).to_json())


@app.get("/metrics")
def metrics():
    return Response(content=generate_latest(), media_type=CONTENT_TYPE_LATEST)


# 主函数
if __name__ == "__main__":
    logging.basicConfig(
        level=getattr(logging, settings.LOG_LEVEL, logging.INFO),
        format="%(asctime)s - %(levelname)s - %(message)s",
    )
    uvicorn.run(
        "main:app",
        host="0.0.0.0",
        port=settings.PORT,
    )
