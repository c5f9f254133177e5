# main.py

from dotenv import load_dotenv
load_dotenv()

from src.ui.cli.cli import run


def main() -> None:
    """Entry point: settings from .env, then the command line."""
    raise SystemExit(run())


if __name__ == "__main__":
    main()
