import os
import sys
from dotenv import load_dotenv
import flyte

load_dotenv()

# ----------------------------------
# Verify Task Environment
# ----------------------------------
verify_env = flyte.TaskEnvironment(
    name="verify_env",
    image=flyte.Image.from_debian_base().with_requirements("requirements.txt"),
    resources=flyte.Resources(cpu=2, memory="2Gi"),
    reusable=flyte.ReusePolicy(
        replicas=2,
        idle_ttl=60,
        concurrency=6,
        scaledown_ttl=60,
    ),
)


def _int(name, default):
    value = os.getenv(name)
    return int(value) if value not in (None, "") else default


# ----------------------------------
# Analysis limits
# ----------------------------------
MAX_STEPS = _int("ASYNCST_MAX_STEPS", 500)
MAX_LOOP_ITERS = _int("ASYNCST_MAX_LOOP_ITERS", 4)
RUNS = _int("ASYNCST_RUNS", 100)
# threads verify spreads its seeded runs over
WORKERS = _int("ASYNCST_WORKERS", 4)
# integer witnesses are searched in [-bound, bound]
VALIDITY_BOUND = _int("ASYNCST_VALIDITY_BOUND", 8)

# ----------------------------------
# logging configuration
# ----------------------------------
TRACE_LOG = os.getenv("ASYNCST_TRACE_LOG")
_color = os.getenv("ASYNCST_COLOR")
COLOR = sys.stderr.isatty() if _color in (None, "") else _color == "1"
