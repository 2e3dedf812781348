import os
import sys

import pytest


@pytest.fixture(scope="session")
def mapsr():
    """Import the extension from an installed package or the build tree."""
    try:
        import _mapsr

        return _mapsr
    except ImportError:
        pass
    ext_dir = os.environ.get("MAPSR_EXT_DIR")
    if not ext_dir:
        pytest.skip("_mapsr not importable and MAPSR_EXT_DIR unset")
    sys.path.insert(0, ext_dir)
    import _mapsr

    return _mapsr
