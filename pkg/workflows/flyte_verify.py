"""
Parallel adherence check: many seeded runs of one program, each checked
against the constraint of its protocol.

Pipeline: parse -> fan out one task per seed -> merge verdicts in seed order

Every task re-parses its inputs, so only plain strings cross task boundaries.
"""

import asyncio
import sys
from pathlib import Path
from typing import List
import flyte

# Add project root to Python path
project_root = Path(__file__).parent.parent
sys.path.insert(0, str(project_root))

import config
from config import verify_env
from constraints.adherence import AdherenceSummary, RunVerdict, verify_seed
from constraints.translate import translate_global
from runtime.runner import Limits
from syntax.parser import parse_global_type, parse_program
from utils.logger import Logger

logger = Logger(path=config.TRACE_LOG or "asyncst_verify_log.jsonl", verbose=False)


# ----------------------------------
# Single run task
# ----------------------------------

@verify_env.task
async def verify_run(program_text: str, protocol_text: str, seed: int,
                     max_steps: int = config.MAX_STEPS,
                     max_loop_iters: int = config.MAX_LOOP_ITERS) -> RunVerdict:
    """
    One seeded run checked against the protocol.

    Args:
        program_text (str): source of the program
        protocol_text (str): source of the protocol
        seed (int): scheduler seed

    Returns:
        RunVerdict: outcome of the run
    """
    program = parse_program(program_text)
    constraint = translate_global(parse_global_type(protocol_text))
    verdict = verify_seed(program, constraint, seed, Limits(max_steps, max_loop_iters))
    await logger.log(seed=seed, outcome=verdict.outcome, events=verdict.events, failed=verdict.failed)
    print(f"[Verify] seed {seed}: {verdict.outcome} after {verdict.events} events")
    return verdict


# ----------------------------------
# Fan-out workflow
# ----------------------------------

@verify_env.task
async def verify_workflow(program_text: str, protocol_text: str,
                          runs: int = config.RUNS, seed: int = 0) -> str:
    """
    Check `runs` seeded runs in parallel and summarize them.

    Returns:
        str: the adherence summary, e.g. "all 100 traces adhere"
    """
    print(f"[Orchestrator] Checking {runs} runs from seed {seed}")
    verdicts: List[RunVerdict] = await asyncio.gather(*(
        verify_run(program_text, protocol_text, seed + k) for k in range(runs)
    ))
    summary = AdherenceSummary.merge(verdicts)
    print(f"[Orchestrator] {summary.describe()}")
    return summary.describe()


# ----------------------------------
# Local Execution Helper
# ----------------------------------

if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(description="Run the Flyte adherence check")
    parser.add_argument(
        "--local",
        action="store_true",
        help="Run workflow locally using flyte.init() instead of remote execution"
    )
    parser.add_argument("program", help="path of the .async program")
    parser.add_argument("protocol", help="path of the .proto protocol")
    parser.add_argument("--runs", type=int, default=config.RUNS)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    if args.local:
        print("Running workflow LOCALLY with flyte.init()")
        flyte.init()
    else:
        print("Running workflow REMOTELY with flyte.init_from_config()")
        flyte.init_from_config(".flyte/config.yaml")

    execution = flyte.run(
        verify_workflow,
        program_text=Path(args.program).read_text(),
        protocol_text=Path(args.protocol).read_text(),
        runs=args.runs,
        seed=args.seed,
    )

    print(f"\n{'='*60}")
    print(f"Execution: {execution.name}")
    print(f"URL: {execution.url}")
    print(f"{'='*60}\n")
