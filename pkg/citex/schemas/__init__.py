# Pydantic schemas for inputs, options and manifests
