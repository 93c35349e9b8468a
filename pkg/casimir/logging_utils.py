import sys
import json
from datetime import datetime, timezone

_LEVELS = {'DEBUG': 10, 'INFO': 20, 'WARN': 30, 'ERROR': 40, 'OFF': 100}
_threshold = _LEVELS['WARN']


def set_level(level: str):
    """Set the minimum level written to stderr (DEBUG, INFO, WARN, ERROR, OFF)."""
    global _threshold
    _threshold = _LEVELS[level.upper()]


def _log(level: str, msg: str, **kwargs):
    if _LEVELS[level] < _threshold:
        return
    log_entry = {
        'time': datetime.now(timezone.utc).isoformat(),
        'level': level,
        'msg': msg,
    }
    log_entry.update(kwargs)
    print(json.dumps(log_entry, default=str), file=sys.stderr)

def log_debug(msg: str, **kwargs):
    _log('DEBUG', msg, **kwargs)

def log_info(msg: str, **kwargs):
    _log('INFO', msg, **kwargs)

def log_warn(msg: str, **kwargs):
    _log('WARN', msg, **kwargs)

def log_error(msg: str, **kwargs):
    _log('ERROR', msg, **kwargs)
