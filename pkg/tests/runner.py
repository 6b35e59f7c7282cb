"""
Script runner shared by the test modules.

Every module ends with `run_tests(globals())` under `__main__`, so
`python -m tests.test_x` runs it without a test framework. The same modules
are collectable by any runner that picks up `test_*` functions.
"""

import os
import shutil
import tempfile
import time
import traceback
from contextlib import contextmanager
from typing import Any, Callable, Dict, Type

PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
GOLDEN_DIR = os.path.join(PROJECT_ROOT, "tests", "golden")


def expect_raises(error: Type[BaseException], func: Callable, *args, **kwargs) -> BaseException:
    """Call func and return the exception it raised; fail when it raises nothing"""
    try:
        func(*args, **kwargs)
    except error as exc:
        return exc
    raise AssertionError(f"{getattr(func, '__name__', func)} did not raise {error.__name__}")


@contextmanager
def scratch_dir():
    path = tempfile.mkdtemp(prefix="nodalnet-test-")
    try:
        yield path
    finally:
        shutil.rmtree(path, ignore_errors=True)


def read_golden(name: str) -> bytes:
    with open(os.path.join(GOLDEN_DIR, name)) as handle:
        return bytes.fromhex("".join(handle.read().split()))


def run_tests(namespace: Dict[str, Any]) -> int:
    """Run every test_* function of a module namespace and print a summary"""
    tests = [(name, func) for name, func in namespace.items()
             if name.startswith("test_") and callable(func)]
    passed, failed = 0, []

    print("\n" + "=" * 60)
    print(f"Running {len(tests)} tests from {namespace.get('__file__', '?')}")
    print("=" * 60)
    for name, func in tests:
        started = time.perf_counter()
        try:
            func()
        except Exception:
            failed.append(name)
            print(f"  FAIL  {name}")
            traceback.print_exc()
            continue
        passed += 1
        print(f"  ok    {name} ({time.perf_counter() - started:.2f}s)")

    print("-" * 60)
    print(f"Passed: {passed}  Failed: {len(failed)}")
    return 1 if failed else 0
