"""lrp package."""
