"""lrp API package."""
