import sys

from coqam.cli import main

sys.exit(main())
