# ./numdiff/__main__.py

import sys

from numdiff.cli import main

sys.exit(main())
