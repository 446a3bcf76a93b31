import sys

from qsec.cli import main

sys.exit(main())
