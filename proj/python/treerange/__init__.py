from ._treerange import *  # noqa: F401,F403
