"""Tests for file formats."""
