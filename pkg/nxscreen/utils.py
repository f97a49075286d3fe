# -*- coding: utf-8 -*-

from contextlib import contextmanager
import hashlib
import re
import time


__all__ = [
    "parse_range",
    "parse_int_list",
    "parse_branch_pairs",
    "format_branch_label",
    "resolve_branch_pairs",
    "file_sha256",
    "StageTimer",
]

_RANGE = re.compile(r"^\s*(-?\d+)\s*\.\.\s*(-?\d+)\s*$")
_PAIR = re.compile(r"\[\s*(\d+)\s*,\s*(\d+)\s*(?:,\s*(\d+)\s*)?\]")


def parse_range(text):
    """Parses an inclusive integer range such as "1..5" (a single integer is also accepted).

    Returns:
        The list of integers in the range, in ascending order.
    """
    text = text.strip()
    if text.lstrip("-").isdigit():
        return [int(text)]
    match = _RANGE.match(text)
    if match is None:
        raise ValueError("Expected a range such as 1..5, got %r" % text)
    start, stop = int(match.group(1)), int(match.group(2))
    if stop < start:
        raise ValueError("Empty range %r" % text)
    return list(range(start, stop + 1))


def parse_int_list(text):
    """Parses "1,2,4" or "1..4" (or a mix, "0,2..3") into a sorted list of distinct integers."""
    values = set()
    for part in text.split(","):
        if part.strip():
            values.update(parse_range(part))
    if not values:
        raise ValueError("Expected at least one integer, got %r" % text)
    return sorted(values)


def parse_branch_pairs(text):
    """Parses "[136,133],[135,133]" into [(136, 133), (135, 133)].

    A third number picks one of several parallel circuits: "[10,20,2]" gives (10, 20, 2).
    """
    pairs = [
        (int(a), int(b)) if not c else (int(a), int(b), int(c)) for a, b, c in _PAIR.findall(text)
    ]
    leftover = _PAIR.sub("", text).replace(",", "").strip()
    if not pairs or leftover:
        raise ValueError("Expected branches as [from,to] or [from,to,circuit], got %r" % text)
    return pairs


def format_branch_label(label):
    return "[%s]" % ",".join(str(v) for v in label)


def resolve_branch_pairs(case, pairs):
    """Maps [from, to] or [from, to, circuit] entries onto distinct branch indices of the case.

    A [from, to] pair given more than once takes the next unused parallel circuit.
    """
    indices = []
    for pair in pairs:
        if len(pair) == 3:
            index = case.find_branch(pair[0], pair[1], circuit=pair[2])
            if index in indices:
                raise ValueError("Branch %s listed twice" % format_branch_label(pair))
        else:
            index = case.find_branch(pair[0], pair[1], exclude=indices)
        indices.append(index)
    return indices


def file_sha256(path, chunk_size=1 << 16):
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            digest.update(chunk)
    return digest.hexdigest()


class StageTimer:
    """Accumulates wall-clock seconds per named stage."""

    def __init__(self):
        self.stages = {}

    @contextmanager
    def stage(self, name):
        start = time.perf_counter()
        try:
            yield
        finally:
            self.add(name, time.perf_counter() - start)

    def add(self, name, seconds):
        self.stages[name] = self.stages.get(name, 0.0) + seconds

    @property
    def total(self):
        return sum(self.stages.values())
