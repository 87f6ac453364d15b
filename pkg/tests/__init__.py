"""Tests for lrp."""
