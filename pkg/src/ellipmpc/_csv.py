def fmt(x) -> str:
    """Locale-independent float text with 17 significant digits."""
    return format(float(x), ".17g")
