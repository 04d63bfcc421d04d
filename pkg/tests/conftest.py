"""Shared corpus helpers for the test suite."""

from pathlib import Path

import pytest

from syntax.parser import parse_global_type, parse_program

CORPUS = Path(__file__).parent.parent / "corpus"
MUTANTS = CORPUS / "mutants"

# name -> (program file, protocol file)
PAIRS = {
    "gui": ("gui.async", "gui.proto"),
    "repeat": ("repeat.async", "repeat.proto"),
    "branch_high": ("branch_high.async", "branch.proto"),
    "branch_low": ("branch_low.async", "branch.proto"),
    "pipeline": ("pipeline.async", "pipeline.proto"),
}


def read(name):
    return (CORPUS / name).read_text()


def load_pair(name):
    """Parsed (program, protocol) of a well-typed corpus pair."""
    program_file, protocol_file = PAIRS[name]
    return parse_program(read(program_file)), parse_global_type(read(protocol_file))


def mutant_files(stem):
    """(program text, protocol text) of a mutant: the mutant file replaces one side of its base pair."""
    base = stem.split("__")[0]
    program_file, protocol_file = PAIRS[base]
    program = read(program_file)
    protocol = read(protocol_file)
    if (MUTANTS / f"{stem}.async").exists():
        program = (MUTANTS / f"{stem}.async").read_text()
    if (MUTANTS / f"{stem}.proto").exists():
        protocol = (MUTANTS / f"{stem}.proto").read_text()
    return program, protocol


def load_mutant(stem):
    program, protocol = mutant_files(stem)
    return parse_program(program), parse_global_type(protocol)


def mutant_stems():
    return sorted({p.stem for p in MUTANTS.iterdir() if p.suffix in (".async", ".proto")})


@pytest.fixture(params=sorted(PAIRS))
def pair_name(request):
    return request.param
