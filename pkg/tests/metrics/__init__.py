"""Tests for tracking and clinical metrics."""
