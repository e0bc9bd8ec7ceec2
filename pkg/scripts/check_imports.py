"""Import every module under src/ and report the ones that fail."""
import importlib
import os
import pkgutil
import sys

PROJECT_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
sys.path.insert(0, PROJECT_ROOT)


def discover_modules(package="src"):
    root = importlib.import_module(package)
    return sorted(
        info.name
        for info in pkgutil.walk_packages(root.__path__, prefix=f"{package}.")
        if not info.ispkg
    )


def main():
    modules = discover_modules()
    failures = {}
    for name in modules:
        try:
            importlib.import_module(name)
        except Exception as e:
            failures[name] = f"{type(e).__name__}: {e}"
        print(f"  {'FAIL' if name in failures else 'OK  '}  {name}")

    print(f"\n{len(modules) - len(failures)}/{len(modules)} modules import cleanly")
    for name, error in failures.items():
        print(f"  - {name}: {error}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
