"""Program generation and reference semantics for property-based tests."""
