# **************************************************************************************

# @package        segmob
# @license        MIT License Copyright (c) 2025 Michael J. Roberts

# **************************************************************************************

from .cli import main

# **************************************************************************************

if __name__ == "__main__":
    raise SystemExit(main())

# **************************************************************************************
