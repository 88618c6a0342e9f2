"""Package version"""

__version__ = "0.3.0"


def get_versions() -> dict[str, str]:
    """Report the package version in the same shape the docs and CLI expect

    Returns
    -------
    dict
        A mapping with (at least) the key "version"
    """
    return {"version": __version__}
