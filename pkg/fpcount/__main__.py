import sys

from fpcount.main import main

sys.exit(main())
