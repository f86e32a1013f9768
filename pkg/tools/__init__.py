"""Tools package for detphase commands.

Each command is implemented in its own module and returns a CommandResult;
the CLI and the MCP server both call these functions.
"""

from tools.det_sign import det_sign
from tools.hodge import hodge
from tools.spectrum import spectrum
from tools.sweep import sweep
from tools.verify import verify
from tools.winding import winding

__all__ = [
    "spectrum",
    "det_sign",
    "winding",
    "sweep",
    "hodge",
    "verify",
]
