import logging
import sys
from typing import Optional, Sequence

from app.cli import build_parser
from app.errors import AuditError, ConfigError, ParameterError, TrialAborted

logger = logging.getLogger(__name__)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        return args.handler(args)
    except ConfigError as e:
        print(f"config error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except (ParameterError, AuditError) as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except TrialAborted as e:
        logger.error(str(e))
        return 4


if __name__ == "__main__":
    sys.exit(main())
