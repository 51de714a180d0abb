import argparse

import uvicorn

from .app import DEFAULT_MAX_BATCH, create_app
from .model import transformers_scorer


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nli-service")
    parser.add_argument("--model", required=True, help="NLI model checkpoint name")
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8301)
    parser.add_argument("--max-batch", type=int, default=DEFAULT_MAX_BATCH)
    args = parser.parse_args(argv)

    scorer = transformers_scorer(args.model, args.device)
    app = create_app(scorer, args.max_batch)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
