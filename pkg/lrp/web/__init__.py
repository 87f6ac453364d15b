"""HTTP front end of the toolchain."""
