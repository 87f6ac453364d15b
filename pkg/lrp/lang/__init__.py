"""Language core: syntax, typing, transformation and execution."""
