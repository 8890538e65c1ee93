"""Run the solver over SMT-LIB text on stdin; one verdict line per check-sat."""

import sys

from .solver import run_script


def main() -> int:
    text = sys.stdin.read()
    timeout = 30.0
    if len(sys.argv) > 1:
        timeout = float(sys.argv[1])
    try:
        for line in run_script(text, timeout):
            print(line)
    except Exception as exc:  # a malformed script is the caller's bug
        print(f'(error "{exc}")')
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
