import sys

from evoflow.cli import main

sys.exit(main())
