import sys

from nematic_mf.cli.application import main

if __name__ == "__main__":
    sys.exit(main())
