import sys

from . import FILES, corpus_path

if __name__ == "__main__":
    if len(sys.argv) != 2 or sys.argv[1] not in FILES:
        print(f"usage: python -m promisekit.corpus {{{'|'.join(FILES)}}}", file=sys.stderr)
        raise SystemExit(64)
    print(corpus_path(sys.argv[1]))
