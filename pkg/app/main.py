import sys
from pathlib import Path

_APP = Path(__file__).resolve().parent
if str(_APP) not in sys.path:
    sys.path.insert(0, str(_APP))

from circbody.cli import main  # noqa: E402


if __name__ == "__main__":
    raise SystemExit(main())
