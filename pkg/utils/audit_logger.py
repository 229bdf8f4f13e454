import os
import json
import logging
import structlog
from datetime import datetime, timezone
from typing import Dict, Any, Optional
from config.settings import settings

# 配置结构化日志
structlog.configure(
    processors=[
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.JSONRenderer(),
    ],
    logger_factory=structlog.stdlib.LoggerFactory(),
)

# 配置标准日志
audit_logger = logging.getLogger("audit")
audit_logger.setLevel(getattr(logging, settings.AUDIT_LOG_LEVEL, logging.INFO))
audit_logger.propagate = False

if settings.AUDIT_ENABLED:
    # 确保日志目录存在
    log_dir = os.path.dirname(settings.AUDIT_LOG_PATH)
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)

    # 添加文件处理器
    file_handler = logging.FileHandler(settings.AUDIT_LOG_PATH)
    file_handler.setFormatter(logging.Formatter('%(message)s'))
    audit_logger.addHandler(file_handler)

    # 如果需要，添加控制台处理器
    if settings.AUDIT_LOG_LEVEL == "DEBUG":
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter('%(message)s'))
        audit_logger.addHandler(console_handler)

# 结构化日志记录器
structured_logger = structlog.get_logger("audit")


class AuditLogger:
    """计算审计日志记录器：每个流水线步骤写一条 JSON 记录"""

    @staticmethod
    def log(event: str, subject: str, details: Dict[str, Any], level: str = "INFO") -> None:
        """
        记录审计事件

        Args:
            event: 事件类型，例如 field.loaded
            subject: 事件主体（域名称、群名称或输入文件）
            details: 事件详情，必须可 JSON 序列化
            level: 日志级别 (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        """
        if not settings.AUDIT_ENABLED:
            return

        log_data = {
            "event": event,
            "subject": subject,
            "timestamp": datetime.now(timezone.utc).isoformat(),
            "details": details,
        }

        log_method = getattr(structured_logger, level.lower(), structured_logger.info)
        log_method(event, subject=subject, **details)

        log_method = getattr(audit_logger, level.lower(), audit_logger.info)
        log_method(json.dumps(log_data, ensure_ascii=False, default=str))

    @staticmethod
    def log_field_event(event: str, field_name: str, details: Dict[str, Any]) -> None:
        """记录数域相关事件"""
        AuditLogger.log(event=f"field.{event}", subject=field_name, details=details)

    @staticmethod
    def log_eta_event(event: str, field_name: str, c: int, details: Dict[str, Any]) -> None:
        """记录 η_c 计算事件"""
        AuditLogger.log(event=f"eta.{event}", subject=field_name, details={"c": c, **details})

    @staticmethod
    def log_limit_event(event: str, subject: str, details: Dict[str, Any]) -> None:
        """记录极限 / PV 计算事件"""
        AuditLogger.log(event=f"limit.{event}", subject=subject, details=details)

    @staticmethod
    def log_check_event(event: str, subject: str, passed: bool, details: Dict[str, Any]) -> None:
        """记录自检结果，失败时提升为 WARNING"""
        AuditLogger.log(
            event=f"check.{event}",
            subject=subject,
            details={"passed": passed, **details},
            level="INFO" if passed else "WARNING",
        )

    @staticmethod
    def log_error(event: str, subject: str, error: Exception, details: Optional[Dict[str, Any]] = None) -> None:
        """记录错误事件"""
        if details is None:
            details = {}

        AuditLogger.log(
            event=f"error.{event}",
            subject=subject,
            details={
                "error_type": type(error).__name__,
                "error_message": str(error),
                **details,
            },
            level="ERROR",
        )
