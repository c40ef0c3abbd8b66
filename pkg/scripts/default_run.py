"""Run the reference 2D scenario, audit it and write the artifacts under out/default_run."""

import sys

from revreact.cli import main

if __name__ == "__main__":
    sys.exit(main(["run", "--out", "out/default_run", *sys.argv[1:]]))
