import sys

from src.app import TopicModelApp
from src.core import get_settings


def main() -> int:
    settings = get_settings()
    app = TopicModelApp(settings)
    return app.run(sys.argv[1:])


if __name__ == "__main__":
    raise SystemExit(main())
