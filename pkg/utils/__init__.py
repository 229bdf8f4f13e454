# utils包初始化文件

# 导出工具类
from utils.audit_logger import AuditLogger
