import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError as PydanticValidationError

from app.cli import build_parser
from app.config import settings
from app.core.exceptions import EXIT_OK, EXIT_VALIDATION, ToolkitError
from app.core.logging import setup_logging
from app.utils.io import dumps_json

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse, dispatch and map errors to exit codes"""
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    logger.debug(f"🚀 {settings.APP_NAME}: {args.command}")

    try:
        result = args.handler(args)
    except ToolkitError as e:
        logger.error(f"❌ {e.message}")
        print(json.dumps({"success": False, "error": e.to_dict()}, default=str))
        return e.exit_code
    except PydanticValidationError as e:
        logger.error(f"❌ Invalid input: {e}")
        print(json.dumps({
            "success": False,
            "error": {"message": "Invalid input", "details": e.errors(include_url=False)},
        }, default=str))
        return EXIT_VALIDATION

    sys.stdout.write(dumps_json(result))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
