"""
Centralized logging setup for MongeLab
"""
import logging
import logging.handlers
import sys
from typing import Dict, Any, Optional
from .config import settings

SOLVER_MODULES = (
    'app.core.series',
    'app.core.radial_ode',
    'app.core.entire',
    'app.core.large',
    'app.core.barrier',
)


def setup_logging(log_to_file: Optional[bool] = None) -> None:
    """Set up logging for a CLI run: console plus rotating file"""

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))

    # Clear any existing handlers
    root_logger.handlers.clear()

    formatter = logging.Formatter(settings.LOG_FORMAT)

    # Console on stderr; stdout carries only the run result line
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(logging.INFO)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)

    if settings.LOG_TO_FILE if log_to_file is None else log_to_file:
        log_dir = settings.get_log_dir()
        log_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.handlers.RotatingFileHandler(
            settings.get_log_file_path(),
            maxBytes=_parse_size(settings.LOG_ROTATION_SIZE),
            backupCount=settings.LOG_RETENTION_COUNT,
            encoding='utf-8'
        )
        file_handler.setLevel(getattr(logging, settings.LOG_LEVEL.upper()))
        file_handler.setFormatter(formatter)
        root_logger.addHandler(file_handler)

    configure_module_loggers()

    logger = logging.getLogger(__name__)
    logger.debug("Logging system initialized")
    logger.debug(f"Log level: {settings.LOG_LEVEL}")


def configure_module_loggers() -> None:
    """Configure specific loggers for different modules"""

    for name in SOLVER_MODULES:
        logging.getLogger(name).setLevel(getattr(logging, settings.SOLVER_LOG_LEVEL.upper()))

    logging.getLogger('app.core.runner').setLevel(logging.INFO)
    logging.getLogger('app.cli').setLevel(logging.INFO)

    # External library loggers - reduce noise
    logging.getLogger('matplotlib').setLevel(logging.WARNING)
    logging.getLogger('matplotlib.font_manager').setLevel(logging.WARNING)
    logging.getLogger('asyncio').setLevel(logging.WARNING)


def _parse_size(size_str: str) -> int:
    """Parse size string like '10MB' to bytes"""
    size_str = size_str.upper()
    if size_str.endswith('KB'):
        return int(size_str[:-2]) * 1024
    elif size_str.endswith('MB'):
        return int(size_str[:-2]) * 1024 * 1024
    elif size_str.endswith('GB'):
        return int(size_str[:-2]) * 1024 * 1024 * 1024
    else:
        return int(size_str)


def log_run_event(logger: logging.Logger, operation: str, extra_data: Dict[str, Any] = None) -> None:
    """Log a solver operation with the pipe-separated key: value layout"""
    base_msg = operation
    if extra_data:
        details = " | ".join([f"{k}: {_format_value(v)}" for k, v in extra_data.items()])
        base_msg += f" | {details}"
    logger.info(base_msg)


def _format_value(value: Any) -> str:
    """Render floats compactly for log lines"""
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
