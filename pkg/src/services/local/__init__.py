from .filesystem import EDGE_LIST_EXTENSIONS, FileUtility

__all__ = ["EDGE_LIST_EXTENSIONS", "FileUtility"]
