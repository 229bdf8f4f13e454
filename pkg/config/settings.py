import os
import logging
from dotenv import load_dotenv

# 尝试加载.env文件，未找到时直接使用环境变量
load_dotenv()

logger = logging.getLogger(__name__)

# 项目根目录，用于定位内置的域规格文件
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).lower() == 'true'


class Settings:
    # 日志配置
    LOG_LEVEL = os.getenv('KT_LOG_LEVEL', 'INFO').upper()

    # 计算审计配置
    AUDIT_ENABLED = _env_bool('KT_AUDIT_ENABLED', 'true')
    AUDIT_LOG_PATH = os.getenv('KT_AUDIT_LOG_PATH', './logs/audit.log')
    AUDIT_LOG_LEVEL = os.getenv('KT_AUDIT_LOG_LEVEL', 'INFO').upper()

    # 服务器配置
    PORT = int(os.getenv('PORT', '8000'))

    # 域规格文件目录（按名称查找 rationals、gaussian 等）
    SPEC_DIR = os.getenv('KT_SPEC_DIR', os.path.join(BASE_DIR, 'specs'))

    # 单位根极大性探测
    MU_PROBE_COUNT = int(os.getenv('KT_MU_PROBE_COUNT', '10'))
    MU_PROBE_BOUND = int(os.getenv('KT_MU_PROBE_BOUND', '1000'))

    # 计算规模上限
    MAX_QUOTIENT_POINTS = int(os.getenv('KT_MAX_QUOTIENT_POINTS', '1000000'))
    MAX_GROUP_ORDER = int(os.getenv('KT_MAX_GROUP_ORDER', '24'))
    MAX_MATRIX_DIM = int(os.getenv('KT_MAX_MATRIX_DIM', '200'))

    # η 列并行计算的进程数（1 表示串行）
    ETA_WORKERS = int(os.getenv('KT_ETA_WORKERS', '1'))

    # selftest 扫描 c 时允许的最大点数 c^n
    SELFTEST_MAX_POINTS = int(os.getenv('KT_SELFTEST_MAX_POINTS', '100000'))

    def spec_path(self, name: str) -> str:
        """根据名称获取内置规格文件路径"""
        return os.path.join(self.SPEC_DIR, f"{name}.toml")

    def log(self):
        """打印配置信息"""
        logger.debug("🔍 [DEBUG] LOG_LEVEL: %s", self.LOG_LEVEL)
        logger.debug("🔍 [DEBUG] AUDIT_ENABLED: %s", self.AUDIT_ENABLED)
        logger.debug("🔍 [DEBUG] AUDIT_LOG_PATH: %s", self.AUDIT_LOG_PATH)
        logger.debug("🔍 [DEBUG] PORT: %s", self.PORT)
        logger.debug("🔍 [DEBUG] SPEC_DIR: %s", self.SPEC_DIR)
        logger.debug("🔍 [DEBUG] MU_PROBE_COUNT: %s (bound %s)", self.MU_PROBE_COUNT, self.MU_PROBE_BOUND)
        logger.debug("🔍 [DEBUG] MAX_QUOTIENT_POINTS: %s", self.MAX_QUOTIENT_POINTS)
        logger.debug("🔍 [DEBUG] MAX_GROUP_ORDER: %s", self.MAX_GROUP_ORDER)
        logger.debug("🔍 [DEBUG] MAX_MATRIX_DIM: %s", self.MAX_MATRIX_DIM)
        logger.debug("🔍 [DEBUG] ETA_WORKERS: %s", self.ETA_WORKERS)

# 创建全局设置实例
settings = Settings()
