"""Tests for splcit."""
