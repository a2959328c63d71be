# SPDX-License-Identifier: Apache-2.0
"""Angular-domain assisted WiFi CSI localization toolkit.

Thin wrapper over the C++ core extension. Installed wheels ship the
extension inside this package; for development builds its directory can
be supplied via the WLOC_EXT_DIR environment variable instead.
"""

import os as _os
import sys as _sys

try:
    from ._core import *  # noqa: F401,F403
except ImportError:
    _ext_dir = _os.environ.get("WLOC_EXT_DIR")
    if _ext_dir and _ext_dir not in _sys.path:
        _sys.path.insert(0, _ext_dir)
    from _core import *  # noqa: F401,F403
