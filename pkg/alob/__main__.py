import sys

from alob.cli import main

sys.exit(main())
