#!/usr/bin/env python3
"""Run every acceptance criterion and print one PASS/FAIL line each."""
import runpy
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))
runpy.run_module("tests.test_acceptance", run_name="__main__")
