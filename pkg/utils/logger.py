import os
import sys
import threading
import time
import json


class Logger:
    """Terminal logger for progress lines, structured events and work counters.

    Everything goes to stderr so that reports on stdout stay byte-identical.
    """

    _BLUE = '\033[94m'
    _GREEN = '\033[92m'
    _YELLOW = '\033[93m'
    _RED = '\033[91m'
    _ENDC = '\033[0m'
    _BOLD = '\033[1m'

    def __init__(self, stream=None):
        self._stream = stream
        # {metric_name: int}
        self._metrics = {}
        self._lock = threading.Lock()

    @property
    def stream(self):
        return self._stream if self._stream is not None else sys.stderr

    @property
    def quiet(self) -> bool:
        return os.getenv("HOMOTOPY_QUIET", "false").lower() == "true"

    def _paint(self, color, text):
        if getattr(self.stream, "isatty", lambda: False)():
            return f"{color}{text}{Logger._ENDC}"
        return text

    def _write(self, text):
        self.stream.write(text + "\n")
        self.stream.flush()

    def start_section(self, title):
        if self.quiet:
            return
        self._write("\n" + self._paint(Logger._BOLD + Logger._BLUE, f"## {title.upper()} ##"))

    def log(self, message, indent=1):
        if self.quiet:
            return
        self._write(f"{'  ' * indent}- {message}")

    def info(self, message, indent=2):
        if self.quiet:
            return
        self._write(self._paint(Logger._YELLOW, f"{'  ' * indent}i {message}"))

    def success(self, message, indent=1):
        if self.quiet:
            return
        self._write(self._paint(Logger._GREEN, f"{'  ' * indent}ok {message}"))

    def fail(self, message, indent=1):
        self._write(self._paint(Logger._RED, f"{'  ' * indent}!! {message}"))

    def structured(self, event: str, **fields):
        payload = {
            'ts': time.strftime('%Y-%m-%dT%H:%M:%S', time.gmtime()),
            'event': event,
            **fields
        }
        self._write(json.dumps(payload, default=str))

    def increment_metric(self, name: str, value: int = 1):
        with self._lock:
            self._metrics[name] = self._metrics.get(name, 0) + int(value)

    def get_metrics(self) -> dict:
        with self._lock:
            return dict(self._metrics)

    def reset_metrics(self):
        with self._lock:
            self._metrics.clear()


logger = Logger()
