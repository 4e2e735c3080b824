"""Tests for the autograd engine."""
