"""Observed spatial and temporal orders of every discretisation."""
from __future__ import annotations

from p2dcell.verification import run_suite


def main() -> None:
    for study in run_suite("all"):
        print(study)


if __name__ == "__main__":
    main()
