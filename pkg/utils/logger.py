import json
from datetime import datetime, timezone


class Logger:
    """Appends one JSON object per record to a JSONL file."""

    def __init__(self, path="asyncst_trace_log.jsonl", verbose=False):
        self.path = path
        self.verbose = verbose

    def _record(self, kwargs):
        kwargs["timestamp"] = datetime.now(timezone.utc).isoformat()
        if self.verbose:
            print("[LOG]", kwargs)
        return json.dumps(kwargs)

    def reset(self):
        open(self.path, "w").close()

    def write(self, **kwargs):
        line = self._record(kwargs)
        with open(self.path, "a") as f:
            f.write(line + "\n")

    async def log(self, **kwargs):
        self.write(**kwargs)
