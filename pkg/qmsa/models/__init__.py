"""Data models and structures."""
