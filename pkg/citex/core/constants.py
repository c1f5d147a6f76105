"""
Constants shared across citex services.
"""

# Reserved key for the "all other journals" aggregate row/column
OTHER_KEY = "OTHER"

# Display names for ranking methods, in rank-table column order
METHOD_DISPLAY_NAMES = {
    "II": "Immediacy Index",
    "IF": "Impact Factor",
    "IFno": "Impact Factor without self-citations",
    "IF5": "Five-year Impact Factor",
    "AI": "Article Influence",
    "EF": "Eigenfactor",
    "SM": "Stigler model",
    "SMgrouped": "Stigler model grouped",
}

# Index window lengths in years before the census year
INDEX_WINDOWS = {
    "II": 0,
    "IF": 2,
    "IFno": 2,
    "IF5": 5,
}


def get_method_display_name(method: str) -> str:
    """
    Get the display name for a ranking method.

    Args:
        method: Method key (e.g., 'IF5', 'SM')

    Returns:
        Human readable name, or the key itself when unknown
    """
    return METHOD_DISPLAY_NAMES.get(method, method)
