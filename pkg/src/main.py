import sys

from src.cli import run_command


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
