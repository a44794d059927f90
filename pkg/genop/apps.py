from django.apps import AppConfig


class GenopConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "genop"
    verbose_name = "Genuine equivariant operads"
