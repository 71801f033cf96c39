"""Native readers for the file formats found in app sandboxes."""
