"""Tests for phantom data."""
