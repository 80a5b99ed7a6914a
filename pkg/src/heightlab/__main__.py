import sys

from heightlab.cli import main

sys.exit(main())
