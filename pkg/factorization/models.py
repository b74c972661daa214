from django.db import models


# --- Журнал запусків класифікатора ---
class ClassificationRun(models.Model):
    """
    Збережений результат класифікації, отриманий через HTTP API.
    """
    content_hash = models.CharField(max_length=64, db_index=True)
    """SHA-256 канонічного JSON вхідної задачі."""

    verdict = models.CharField(max_length=40)
    """Підсумковий вердикт (branch-commutative, unbalanced, ...)."""

    sheet_count = models.PositiveIntegerField(null=True, blank=True)
    """Кількість листів поверхні; NULL, якщо атлас не побудовано."""

    report = models.JSONField()
    """Повний JSON-звіт у тій формі, в якій його повернув API."""

    created_at = models.DateTimeField(auto_now_add=True)
    """Дата та час запуску (встановлюється автоматично)."""

    class Meta:
        ordering = ('-created_at',)

    def __str__(self):
        """Повертає скорочений хеш задачі та вердикт."""
        return f"{self.content_hash[:12]}: {self.verdict}"
