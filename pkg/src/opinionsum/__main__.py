import sys

from opinionsum.cli import main

sys.exit(main())
