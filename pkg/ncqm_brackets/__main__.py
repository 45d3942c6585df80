import sys

from .cli.commands import main as run_cli


def main() -> int:
    """Main entry point for the project."""
    return run_cli()


if __name__ == "__main__":
    sys.exit(main())
